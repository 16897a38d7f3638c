//! Enumerable and computable functors, their images, and law checks.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::coding::{decode_fact, Fact, FactCode, Nat};
use crate::error::{Error, Result};
use crate::operators::{
    enum_apply_stage, Budget, DecidedBy, DiagramOf, EnumerationOperator, ImageOracle, JoinOracle, Oracle,
    OracleProgram, PermGraph, RunOutcome, SearchOutcome, Searcher,
};
use crate::programs;
use crate::report::{Report, Verdict};
use crate::structures::{restrict, tuples_over, FiniteDiagram, Perm, PermutedCopy, Presentation, SharedPresentation, Signature};

/// `(Ψ, Φ*)`: images are enumerated, arrows computed from `A ⊕ f ⊕ Ã`.
#[derive(Clone, Debug)]
pub struct EnumerableFunctor {
    pub name: String,
    /// The structure whose copies the functor is registered for.
    pub source: String,
    pub source_sig: Signature,
    pub target_sig: Signature,
    pub psi: Arc<EnumerationOperator>,
    pub phi_star: Arc<OracleProgram>,
}

/// `(Φ, Φ*)`: images are decided.
#[derive(Clone, Debug)]
pub struct ComputableFunctor {
    pub name: String,
    pub source: String,
    pub source_sig: Signature,
    pub target_sig: Signature,
    pub phi: Arc<OracleProgram>,
    pub phi_star: Arc<OracleProgram>,
}

#[derive(Clone, Debug)]
pub enum Functor {
    Enumerable(EnumerableFunctor),
    Computable(ComputableFunctor),
}

impl EnumerableFunctor {
    pub fn identity(source: &str, sig: Signature) -> Self {
        EnumerableFunctor {
            name: "identity".into(),
            source: source.into(),
            source_sig: sig.clone(),
            target_sig: sig,
            psi: Arc::new(EnumerationOperator::identity()),
            phi_star: Arc::new(programs::projection()),
        }
    }

    /// Edge complement of a graph.
    pub fn complement(source: &str) -> Self {
        Self::complement_over(source, Signature::graph())
    }

    /// Complement of relation 0 over `sig`. On a signature without that
    /// relation this copies the diagram unchanged.
    pub fn complement_over(source: &str, sig: Signature) -> Self {
        EnumerableFunctor {
            name: "complement".into(),
            source: source.into(),
            source_sig: sig.clone(),
            target_sig: sig,
            psi: Arc::new(EnumerationOperator::complement(0)),
            phi_star: Arc::new(programs::projection()),
        }
    }

    /// The identity operator with arrows sent to the constant 0 map.
    pub fn broken_star(source: &str, sig: Signature) -> Self {
        EnumerableFunctor {
            name: "broken-star".into(),
            phi_star: Arc::new(programs::constant(0)),
            ..Self::identity(source, sig)
        }
    }
}

impl Functor {
    pub fn name(&self) -> &str {
        match self {
            Functor::Enumerable(f) => &f.name,
            Functor::Computable(f) => &f.name,
        }
    }

    pub fn phi_star(&self) -> &Arc<OracleProgram> {
        match self {
            Functor::Enumerable(f) => &f.phi_star,
            Functor::Computable(f) => &f.phi_star,
        }
    }

    pub fn target_sig(&self) -> &Signature {
        match self {
            Functor::Enumerable(f) => &f.target_sig,
            Functor::Computable(f) => &f.target_sig,
        }
    }

    pub fn source_sig(&self) -> &Signature {
        match self {
            Functor::Enumerable(f) => &f.source_sig,
            Functor::Computable(f) => &f.source_sig,
        }
    }

    /// The image diagram as a plain oracle; undecided facts read as absent.
    pub fn image_oracle<'a>(&'a self, a: &'a dyn Oracle) -> Box<dyn Oracle + 'a> {
        match self {
            Functor::Enumerable(f) => Box::new(ImageOracle { op: &f.psi, inner: a }),
            Functor::Computable(f) => Box::new(DecidedBy { prog: &f.phi, inner: a }),
        }
    }
}

/// Three-valued view of `F(A)`.
pub struct FunctorImage<'a> {
    pub functor: &'a Functor,
    pub source: &'a dyn Oracle,
    pub budget: u64,
}

pub fn functor_image<'a>(functor: &'a Functor, source: &'a dyn Oracle, budget: u64) -> FunctorImage<'a> {
    FunctorImage { functor, source, budget }
}

impl FunctorImage<'_> {
    /// `Some(bit)` once decided; an error if both signs are produced.
    pub fn truth(&self, fact: &Fact) -> Result<Option<bool>> {
        let (pos, neg) = match self.functor {
            Functor::Enumerable(f) => {
                let found = |t: &Fact| {
                    matches!(
                        Searcher::new(&f.psi, t, false).run(self.source, &Budget::new(self.budget)),
                        SearchOutcome::Found(_)
                    )
                };
                (found(fact), found(&fact.negation()))
            }
            Functor::Computable(f) => {
                let run = |t: &Fact| f.phi.exec(self.source, &t.code().0, &Budget::new(self.budget));
                match (run(fact), run(&fact.negation())) {
                    (Ok(p), Ok(n)) => (p != Nat::from(0u32), n != Nat::from(0u32)),
                    (Ok(p), Err(_)) if p != Nat::from(0u32) => (true, false),
                    (Err(_), Ok(n)) if n != Nat::from(0u32) => (false, true),
                    _ => return Ok(None),
                }
            }
        };
        match (pos, neg) {
            (true, true) => Err(Error::FunctorIllFormed { atom: fact.code().0.to_string() }),
            (true, false) => Ok(Some(true)),
            (false, true) => Ok(Some(false)),
            (false, false) => Ok(None),
        }
    }

    pub fn truth_code(&self, code: &Nat) -> Result<Option<bool>> {
        match decode_fact(&FactCode(code.clone())) {
            Ok(f) => self.truth(&f),
            Err(_) => Ok(Some(false)),
        }
    }

    /// Elements among `0..scan` whose membership resolves to true, at most
    /// `count` of them.
    pub fn elements(&self, count: usize, scan: u64) -> Result<Vec<Nat>> {
        let mut out = Vec::new();
        for x in 0..scan {
            if out.len() == count {
                break;
            }
            let x = Nat::from(x);
            if self.truth(&Fact::element(x.clone()))? == Some(true) {
                out.push(x);
            }
        }
        Ok(out)
    }
}

/// `F(f)` as a program bound to its join oracle.
pub struct MappedIso<'a> {
    pub prog: Arc<OracleProgram>,
    pub join: JoinOracle<'a>,
    pub budget: u64,
}

impl MappedIso<'_> {
    pub fn apply(&self, x: &Nat) -> Option<Nat> {
        self.prog.exec(&self.join, x, &Budget::new(self.budget)).ok()
    }

    /// A recorded run, for use inspection.
    pub fn run(&self, x: &Nat) -> RunOutcome {
        self.prog.run(&self.join, x, self.budget)
    }
}

/// `F(f) = Φ*^{A ⊕ f ⊕ B}`.
pub fn functor_map_iso<'a>(
    functor: &Functor,
    a: &'a dyn Oracle,
    f: &'a dyn Oracle,
    b: &'a dyn Oracle,
    budget: u64,
) -> MappedIso<'a> {
    MappedIso { prog: functor.phi_star().clone(), join: JoinOracle { left: a, map: f, right: b }, budget }
}

/// A presentation with inputs at which to test the laws: elements of the
/// functor's image of it.
pub struct LawCase {
    pub name: String,
    pub presentation: SharedPresentation,
    pub inputs: Vec<Nat>,
}

/// Identity law on every case and composition law for consecutive pairs
/// of sample isomorphisms (each copy obtained by renaming through the
/// isomorphism). A failure carries the input.
pub fn check_functor_laws(functor: &Functor, cases: &[LawCase], isos: &[Perm], budget: u64) -> Report {
    let mut report = Report::new(format!("laws {}", functor.name()));
    let id = Perm::Identity;
    for case in cases {
        let a = DiagramOf(case.presentation.as_ref());
        let graph = PermGraph(&id);
        let fid = functor_map_iso(functor, &a, &graph, &a, budget);
        let mut v = Verdict::Pass;
        for x in &case.inputs {
            v = v.and(match fid.apply(x) {
                Some(y) if y == *x => Verdict::Pass,
                Some(_) => Verdict::Fail { witness: x.clone() },
                None => Verdict::Inconclusive,
            });
            if v.is_fail() {
                break;
            }
        }
        report.push(format!("identity-law[{}]", case.name), v);

        let mut v = Verdict::Pass;
        for (i, f) in isos.iter().enumerate() {
            let g = &isos[(i + 1) % isos.len()];
            let b_p: SharedPresentation = Arc::new(PermutedCopy::new(case.presentation.clone(), f.clone()));
            let c_p: SharedPresentation = Arc::new(PermutedCopy::new(b_p.clone(), g.clone()));
            let (b, c) = (DiagramOf(b_p.as_ref()), DiagramOf(c_p.as_ref()));
            let gf = f.then(g);
            let (fg, gg, gfg) = (PermGraph(f), PermGraph(g), PermGraph(&gf));
            let ff = functor_map_iso(functor, &a, &fg, &b, budget);
            let fgm = functor_map_iso(functor, &b, &gg, &c, budget);
            let fgf = functor_map_iso(functor, &a, &gfg, &c, budget);
            for x in &case.inputs {
                let lhs = fgf.apply(x);
                let rhs = ff.apply(x).and_then(|y| fgm.apply(&y));
                v = v.and(match (lhs, rhs) {
                    (Some(l), Some(r)) if l == r => Verdict::Pass,
                    (Some(_), Some(_)) => Verdict::Fail { witness: x.clone() },
                    _ => Verdict::Inconclusive,
                });
                if v.is_fail() {
                    break;
                }
            }
        }
        report.push(format!("composition-law[{}]", case.name), v);
    }
    report
}

/// `Ψ_stage(d1) ⊆ Ψ_stage(d2)` for `d1 ⊆ d2`. A failure carries the first
/// code produced from `d1` but not from `d2`.
pub fn check_substructure_preservation(
    functor: &EnumerableFunctor,
    d1: &FiniteDiagram,
    d2: &FiniteDiagram,
    stage: u64,
) -> Result<Verdict> {
    if !d1.is_subset(d2) {
        return Err(Error::InvalidInput("the first diagram is not contained in the second".into()));
    }
    let small = enum_apply_stage(&functor.psi, &d1.codes(), stage);
    let big = enum_apply_stage(&functor.psi, &d2.codes(), stage);
    Ok(match small.difference(&big).next() {
        Some(c) => Verdict::Fail { witness: c.clone() },
        None => Verdict::Pass,
    })
}

/// Substructure preservation for every pair `S1 ⊆ S2` of subsets of the
/// first `support` elements of `p`. A failure carries the offending code.
pub fn check_nested_restrictions(
    functor: &EnumerableFunctor,
    p: &dyn Presentation,
    support: usize,
    stage: u64,
) -> Verdict {
    let pts = p.elements(support);
    let images: Vec<BTreeSet<Nat>> = (0..1usize << pts.len())
        .map(|mask| {
            let sub: Vec<Nat> = pts.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, x)| x.clone()).collect();
            enum_apply_stage(&functor.psi, &restrict(p, &sub).codes(), stage)
        })
        .collect();
    for small in 0..images.len() {
        for big in 0..images.len() {
            if small & big == small {
                if let Some(c) = images[small].difference(&images[big]).next() {
                    return Verdict::Fail { witness: c.clone() };
                }
            }
        }
    }
    Verdict::Pass
}

/// Facts to compare when checking that a map preserves literals: equality
/// on pairs and every listed relation of arity at most 3.
pub fn facts_over(sig: &Signature, elems: &[Nat]) -> Vec<Fact> {
    let mut out = Vec::new();
    for t in tuples_over(elems, 2) {
        out.push(Fact::eq(true, t[0].clone(), t[1].clone()));
    }
    for (rel, arity) in sig.listed_relations() {
        if arity <= 3 {
            for t in tuples_over(elems, arity) {
                out.push(Fact::rel(true, rel, t));
            }
        }
    }
    out
}

/// Checks that `map` is injective on `elems` and that every atom over
/// `elems` has the same truth value in `src` as its image in `dst`.
/// Returns the two verdicts; literal failures carry the source fact code.
pub fn check_partial_iso(
    sig: &Signature,
    elems: &[Nat],
    map: &dyn Fn(&Nat) -> Option<Nat>,
    src: &dyn Fn(&Fact) -> Result<Option<bool>>,
    dst: &dyn Fn(&Fact) -> Result<Option<bool>>,
) -> Result<(Verdict, Verdict)> {
    let mut images = Vec::with_capacity(elems.len());
    let mut injective = Verdict::Pass;
    let mut seen = BTreeSet::new();
    for x in elems {
        match map(x) {
            Some(y) => {
                if !seen.insert(y.clone()) && !injective.is_fail() {
                    injective = Verdict::Fail { witness: x.clone() };
                }
                images.push(Some(y));
            }
            None => {
                injective = injective.and(Verdict::Inconclusive);
                images.push(None);
            }
        }
    }
    let mapped: Vec<(Nat, Nat)> = elems
        .iter()
        .zip(&images)
        .filter_map(|(x, y)| y.clone().map(|y| (x.clone(), y)))
        .collect();
    let lookup: std::collections::BTreeMap<Nat, Nat> = mapped.iter().cloned().collect();
    let domain: Vec<Nat> = mapped.into_iter().map(|(x, _)| x).collect();
    let mut literals = if domain.len() == elems.len() { Verdict::Pass } else { Verdict::Inconclusive };
    for fact in facts_over(sig, &domain) {
        let image = fact.map_args(|a| lookup[a].clone());
        let v = match (src(&fact)?, dst(&image)?) {
            (Some(p), Some(q)) if p == q => Verdict::Pass,
            (Some(_), Some(_)) => Verdict::Fail { witness: fact.code().0 },
            _ => Verdict::Inconclusive,
        };
        literals = literals.and(v);
        if literals.is_fail() {
            break;
        }
    }
    Ok((injective, literals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::nat;
    use crate::structures::{Graph, GraphRule, PureEquality};

    fn n(v: u64) -> Nat {
        nat(v)
    }

    #[test]
    fn identity_image_agrees_with_rado() {
        let g = Graph::new(GraphRule::Rado);
        let f = Functor::Enumerable(EnumerableFunctor::identity("rado", Signature::graph()));
        let o = DiagramOf(&g);
        let img = functor_image(&f, &o, 100);
        for c in 0..500u64 {
            let truth = crate::structures::diagram_bit(&g, &n(c));
            let got = img.truth_code(&n(c)).unwrap();
            if truth {
                assert_eq!(got, Some(true), "code {c}");
            } else {
                assert_ne!(got, Some(true), "code {c}");
            }
        }
    }

    #[test]
    fn complement_of_complete_graph() {
        let g = Graph::new(GraphRule::Complete);
        let f = Functor::Enumerable(EnumerableFunctor::complement("complete-graph"));
        let o = DiagramOf(&g);
        let img = functor_image(&f, &o, 100);
        for i in 0..20 {
            for j in 0..20 {
                if i != j {
                    let e = Fact::rel(true, 0, vec![n(i), n(j)]);
                    assert_eq!(img.truth(&e).unwrap(), Some(false));
                }
            }
        }
    }

    #[test]
    fn complement_of_rado_lacks_edge_01() {
        let g = Graph::new(GraphRule::Rado);
        let f = Functor::Enumerable(EnumerableFunctor::complement("rado"));
        let o = DiagramOf(&g);
        let img = functor_image(&f, &o, 100);
        assert_eq!(img.truth(&Fact::rel(true, 0, vec![n(0), n(1)])).unwrap(), Some(false));
    }

    #[test]
    fn mapped_isos() {
        let p = PureEquality::default();
        let a = DiagramOf(&p);
        let f = Functor::Enumerable(EnumerableFunctor::identity("pure-equality", Signature::empty()));
        let id = Perm::Identity;
        let g = PermGraph(&id);
        let m = functor_map_iso(&f, &a, &g, &a, 1000);
        for x in 0..=50 {
            assert_eq!(m.apply(&n(x)), Some(n(x)));
        }
        let swap = Perm::Transposition(n(0), n(1));
        let g = PermGraph(&swap);
        let m = functor_map_iso(&f, &a, &g, &a, 1000);
        assert_eq!(m.apply(&n(0)), Some(n(1)));
        assert_eq!(m.apply(&n(1)), Some(n(0)));
        assert_eq!(m.apply(&n(5)), Some(n(5)));
    }

    #[test]
    fn laws_and_broken_star() {
        let rado: SharedPresentation = Arc::new(Graph::new(GraphRule::Rado));
        let case = || LawCase { name: "rado".into(), presentation: rado.clone(), inputs: (0..20).map(n).collect() };
        let isos = [Perm::SwapPairs, Perm::Rotate { modulus: 7, by: 3 }];
        let good = Functor::Enumerable(EnumerableFunctor::complement("rado"));
        let r = check_functor_laws(&good, &[case()], &isos, 10_000);
        assert!(r.checks.iter().all(|c| c.verdict == Verdict::Pass), "{r:?}");

        let bad = Functor::Enumerable(EnumerableFunctor::broken_star("rado", Signature::graph()));
        let r = check_functor_laws(&bad, &[case()], &isos, 10_000);
        assert_eq!(r.get("identity-law[rado]"), Some(&Verdict::Fail { witness: n(1) }));
    }

    #[test]
    fn substructures() {
        let g = Graph::new(GraphRule::Rado);
        let f = EnumerableFunctor::complement("rado");
        let d1 = restrict(&g, &[n(0), n(1)]);
        let d2 = restrict(&g, &[n(0), n(1), n(2)]);
        assert_eq!(check_substructure_preservation(&f, &d1, &d2, 2000).unwrap(), Verdict::Pass);
        assert_eq!(check_substructure_preservation(&f, &FiniteDiagram::default(), &d1, 2000).unwrap(), Verdict::Pass);
        assert!(check_substructure_preservation(&f, &d2, &d1, 2000).is_err());
    }
}
