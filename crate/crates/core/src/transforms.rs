//! Artifact-to-artifact transformations between functors and
//! interpretations, and the checks that certify their outputs on prefixes.

use std::sync::Arc;

use crate::coding::{enc_tuple, Fact, Nat};
use crate::error::{Error, Result};
use crate::functors::{
    check_functor_laws, check_partial_iso, functor_image, functor_map_iso, ComputableFunctor, EnumerableFunctor,
    Functor, FunctorImage, LawCase,
};
use crate::interpretations::{
    check_congruence, eval_sigma1_budget, ComputableEquiv, EffectiveInterpretation, FamilyBody, ReferenceMap,
    Sigma1Family,
};
use crate::operators::{
    Budget, DecidedBy, DiagramOf, EnumerationOperator, GraphOf, ImageOracle, JoinOracle, Membership, OperatorBody,
    Oracle, OracleProgram, PermGraph,
};
use crate::programs::{self, ChainView, Step};
use crate::report::{Report, Verdict};
use crate::structures::{find_partial_isos, restrict, FiniteDiagram, Perm, PermutedCopy, SharedPresentation, Signature, TriangularGraph};

/// Bounds shared by the verification routines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    /// Image elements examined for map checks.
    pub prefix: usize,
    /// Elements fed to the functor laws.
    pub law_prefix: usize,
    /// Fact codes below this must be decided.
    pub fact_bound: u64,
    /// Codes scanned when looking for image elements.
    pub scan: u64,
    /// Work per individual query or run.
    pub budget: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { prefix: 30, law_prefix: 20, fact_bound: 500, scan: 4000, budget: 200_000 }
    }
}

/// The two sample isomorphisms every law and square check uses.
pub fn sample_isos() -> Vec<Perm> {
    vec![Perm::SwapPairs, Perm::Rotate { modulus: 7, by: 3 }]
}

fn unwrap_or_inconclusive(r: Result<(Verdict, Verdict)>) -> (Verdict, Verdict) {
    match r {
        Ok(v) => v,
        Err(Error::FunctorIllFormed { atom }) => {
            let w = atom.parse().unwrap_or_default();
            (Verdict::Fail { witness: w }, Verdict::Fail { witness: atom.parse().unwrap_or_default() })
        }
        Err(_) => (Verdict::Inconclusive, Verdict::Inconclusive),
    }
}

fn presentation_truth(p: &SharedPresentation) -> impl Fn(&Fact) -> Result<Option<bool>> + '_ {
    move |f| Ok(Some(p.truth(f).unwrap_or(false)))
}

fn image_truth_fn<'a>(img: &'a FunctorImage<'a>) -> impl Fn(&Fact) -> Result<Option<bool>> + 'a {
    move |f| img.truth(f)
}

// ---------------------------------------------------------------------------
// Enumerable to computable

/// `G` together with `Λ = θ` and its inverse.
#[derive(Clone, Debug)]
pub struct ComputableUpgrade {
    pub functor: ComputableFunctor,
    pub lambda: Arc<OracleProgram>,
    pub lambda_inverse: Arc<OracleProgram>,
}

/// Relabels `F(A)` by `b ↦ ⟨b, s⟩`, `s` the first stage listing `b = b`.
pub fn enum_to_computable(f: &EnumerableFunctor) -> ComputableUpgrade {
    let psi = f.psi.clone();
    ComputableUpgrade {
        functor: ComputableFunctor {
            name: format!("{}'", f.name),
            source: f.source.clone(),
            source_sig: f.source_sig.clone(),
            target_sig: f.target_sig.clone(),
            phi: Arc::new(programs::decide_pulled(psi.clone())),
            phi_star: Arc::new(programs::conjugate_star(psi.clone(), f.phi_star.clone())),
        },
        lambda: Arc::new(programs::theta(psi)),
        lambda_inverse: Arc::new(programs::theta_inverse()),
    }
}

/// Checks `Λ^A : F(A) → G(A)`, that `G` decides small codes, and the laws
/// for `G`.
pub fn verify_enum_to_computable(
    f: &EnumerableFunctor,
    up: &ComputableUpgrade,
    a: &SharedPresentation,
    bounds: &Bounds,
) -> Result<Report> {
    let mut report = Report::new(format!("enum2comp {} on {}", f.name, a.name()));
    let oracle = DiagramOf(a.as_ref());
    let fe = Functor::Enumerable(f.clone());
    let ge = Functor::Computable(up.functor.clone());
    let f_img = functor_image(&fe, &oracle, bounds.budget);
    let g_img = functor_image(&ge, &oracle, bounds.budget);
    let elems = f_img.elements(bounds.prefix, bounds.scan)?;
    if elems.len() < bounds.prefix {
        report.note(format!("only {} image elements below {}", elems.len(), bounds.scan));
    }
    let lambda = |x: &Nat| up.lambda.exec(&oracle, x, &Budget::new(bounds.budget)).ok();
    let (inj, lits) = unwrap_or_inconclusive(check_partial_iso(
        &f.target_sig,
        &elems,
        &lambda,
        &image_truth_fn(&f_img),
        &image_truth_fn(&g_img),
    ));
    report.push("lambda-injective", inj);
    report.push("lambda-literals", lits);

    let mut inv = Verdict::Pass;
    for x in &elems {
        let back = lambda(x).and_then(|y| up.lambda_inverse.exec(&oracle, &y, &Budget::new(bounds.budget)).ok());
        inv = inv.and(match back {
            Some(b) if b == *x => Verdict::Pass,
            Some(_) => Verdict::Fail { witness: x.clone() },
            None => Verdict::Inconclusive,
        });
    }
    report.push("lambda-inverse", inv);

    let mut decides = Verdict::Pass;
    for c in 0..bounds.fact_bound {
        if up.functor.phi.exec(&oracle, &Nat::from(c), &Budget::new(bounds.budget)).is_err() {
            decides = Verdict::Inconclusive;
            report.note(format!("G did not halt on code {c}"));
            break;
        }
    }
    report.push("g-decides", decides);

    let inputs: Vec<Nat> = elems.iter().take(bounds.law_prefix).filter_map(lambda).collect();
    let case = LawCase { name: a.name(), presentation: a.clone(), inputs };
    report.absorb("g-", check_functor_laws(&ge, &[case], &sample_isos(), bounds.budget));
    Ok(report)
}

// ---------------------------------------------------------------------------
// Prepending a row

/// Row 0 decided by `x`, row `i + 1` by row `i` of `seq`.
pub fn prepend_computable(x: Arc<OracleProgram>, seq: Arc<OracleProgram>) -> OracleProgram {
    programs::prepend(x, seq)
}

/// Row 0, the shift law on rows 1 to 3, and a second prepend, for inputs
/// up to `bound`. Failures carry the index pair.
pub fn check_prepend(x: &Arc<OracleProgram>, seq: &Arc<OracleProgram>, bound: u64, budget: u64) -> Report {
    let none = std::collections::BTreeSet::<Nat>::new();
    let run = |p: &OracleProgram, i: u64, v: u64| {
        p.exec(&none, &crate::coding::pair_u64(i, v), &Budget::new(budget)).ok().map(|r| r != Nat::from(0u32))
    };
    let plain = |p: &OracleProgram, v: u64| p.exec(&none, &Nat::from(v), &Budget::new(budget)).ok().map(|r| r != Nat::from(0u32));
    let once = prepend_computable(x.clone(), seq.clone());
    let twice = prepend_computable(x.clone(), Arc::new(once.clone()));
    let mut report = Report::new(format!("prepend {} to {}", x.name, seq.name));
    let compare = |l: Option<bool>, r: Option<bool>, i: u64, v: u64| match (l, r) {
        (Some(p), Some(q)) if p == q => Verdict::Pass,
        (Some(_), Some(_)) => Verdict::Fail { witness: crate::coding::pair_u64(i, v) },
        _ => Verdict::Inconclusive,
    };
    let mut row0 = Verdict::Pass;
    let mut shift = Verdict::Pass;
    let mut nested = Verdict::Pass;
    for v in 0..=bound {
        row0 = row0.and(compare(run(&once, 0, v), plain(x, v), 0, v));
        for i in 1..=3 {
            shift = shift.and(compare(run(&once, i, v), run(seq, i - 1, v), i, v));
        }
        nested = nested.and(compare(run(&twice, 0, v), plain(x, v), 0, v));
        nested = nested.and(compare(run(&twice, 1, v), plain(x, v), 1, v));
        nested = nested.and(compare(run(&twice, 2, v), run(seq, 0, v), 2, v));
    }
    report.push("row0", row0);
    report.push("shift", shift);
    report.push("nested", nested);
    report
}

// ---------------------------------------------------------------------------
// Interpretation to functor

/// The functor read off an interpretation: `Ψ` is synthesized from the
/// formula families and arrows act coordinatewise on representatives.
pub fn interp_to_functor(interp: Arc<EffectiveInterpretation>, source: &str) -> EnumerableFunctor {
    EnumerableFunctor {
        name: format!("functor[{}]", interp.name),
        source: source.into(),
        source_sig: interp.source_sig.clone(),
        target_sig: interp.target_sig.clone(),
        phi_star: Arc::new(programs::tuple_lift_rep(interp.sim.clone())),
        psi: Arc::new(EnumerationOperator {
            name: format!("synth[{}]", interp.name),
            body: OperatorBody::Synthesized(interp),
        }),
    }
}

/// Decided facts of an image over the given elements, renamed to
/// `0..elems.len()`. Returns the diagram and the number left undecided.
pub fn image_fragment(img: &FunctorImage, sig: &Signature, elems: &[Nat]) -> Result<(FiniteDiagram, usize)> {
    let mut d = FiniteDiagram::default();
    let mut undecided = 0;
    let index: std::collections::BTreeMap<&Nat, Nat> =
        elems.iter().enumerate().map(|(i, e)| (e, Nat::from(i))).collect();
    for fact in crate::functors::facts_over(sig, elems) {
        match img.truth(&fact)? {
            Some(b) => {
                let renamed = fact.map_args(|a| index[a].clone());
                d.insert(if b { renamed } else { renamed.negation() });
            }
            None => undecided += 1,
        }
    }
    Ok((d, undecided))
}

/// `h` well-definedness and idempotence on codes up to `code_bound`, and
/// the first `reps` image elements compared with the interpretation's
/// reference structure.
pub fn verify_interp_to_functor(
    interp: &Arc<EffectiveInterpretation>,
    a: &SharedPresentation,
    reps: usize,
    code_bound: u64,
    bounds: &Bounds,
) -> Result<Report> {
    let mut report = Report::new(format!("interp2functor {} on {}", interp.name, a.name()));
    let hs: Vec<Nat> = (0..=code_bound).map(|c| interp.h(&Nat::from(c))).collect();
    let mut wd = Verdict::Pass;
    'outer: for x in 0..=code_bound as usize {
        for y in 0..=code_bound as usize {
            let same = interp.sim.decide(&Nat::from(x), &Nat::from(y));
            if (hs[x] == hs[y]) != same {
                wd = Verdict::Fail { witness: crate::coding::pair_u64(x as u64, y as u64) };
                break 'outer;
            }
        }
    }
    report.push("h-well-defined", wd);
    let mut idem = Verdict::Pass;
    for (x, h) in hs.iter().enumerate() {
        if interp.h(h) != *h {
            idem = Verdict::Fail { witness: Nat::from(x) };
            break;
        }
    }
    report.push("h-idempotent", idem);

    let f = Functor::Enumerable(interp_to_functor(interp.clone(), &a.name()));
    let oracle = DiagramOf(a.as_ref());
    let img = functor_image(&f, &oracle, bounds.budget);
    let elems = img.elements(reps, bounds.scan)?;
    let verdict = if elems.len() < reps {
        report.note(format!("found {} of {reps} representatives", elems.len()));
        Verdict::Inconclusive
    } else {
        let (frag, undecided) = image_fragment(&img, &interp.target_sig, &elems)?;
        match reference_fragment(interp, &elems) {
            None => Verdict::Inconclusive,
            Some(_) if undecided > 0 => Verdict::Inconclusive,
            Some(reference) => {
                if find_partial_isos(&frag, &reference, reps)?.is_empty() {
                    Verdict::Fail { witness: elems[reps - 1].clone() }
                } else {
                    Verdict::Pass
                }
            }
        }
    };
    report.push("fragment-matches-reference", verdict);
    Ok(report)
}

/// The reference structure restricted to the images of the given
/// representatives.
fn reference_fragment(interp: &EffectiveInterpretation, reps: &[Nat]) -> Option<FiniteDiagram> {
    let tuples: Vec<Vec<Nat>> =
        reps.iter().map(|r| crate::coding::dec_tuple(&crate::coding::TupleCode(r.clone()))).collect();
    match interp.reference.as_ref()? {
        ReferenceMap::TriangularIndex => {
            let tri = TriangularGraph::default();
            let idx: Vec<Nat> = tuples
                .iter()
                .map(|t| tri.index_of(&t[0], &t[1]).map(Nat::from))
                .collect::<Option<_>>()?;
            Some(restrict(&tri, &idx))
        }
        ReferenceMap::Coordinate(_) => None,
    }
}

// ---------------------------------------------------------------------------
// Functor to interpretation

/// Both forms of the interpretation read off a functor.
#[derive(Clone, Debug)]
pub struct FunctorInterpretation {
    /// Tuples `(ā, i)`.
    pub sigma: EffectiveInterpretation,
    /// Tuples `(ā, i, j)` with `j` naming a domain certificate; this is the
    /// interpretation proper.
    pub star: EffectiveInterpretation,
    pub dim: usize,
}

/// `dim` is the number of parameters `ā`; it must cover the support of
/// every domain axiom that is to be reflected.
pub fn functor_to_interp(f: &EnumerableFunctor, dim: usize) -> FunctorInterpretation {
    let op = f.psi.clone();
    let relations = f.target_sig.listed_relations();
    let rels = |block: usize, positive: bool| -> Vec<Sigma1Family> {
        relations
            .iter()
            .map(|&(rel, arity)| Sigma1Family {
                name: format!("{}R{rel}", if positive { "" } else { "not-" }),
                free: arity * block,
                body: FamilyBody::OpRelation { op: op.clone(), rel, positive, arity, block, coord: dim },
            })
            .collect()
    };
    let sigma = EffectiveInterpretation {
        name: format!("sigma[{}]", f.name),
        source_sig: f.source_sig.clone(),
        target_sig: f.target_sig.clone(),
        dom_arity: dim + 1,
        dom_pos: Sigma1Family { name: "dom".into(), free: dim + 1, body: FamilyBody::OpDomain { op: op.clone(), dim } },
        dom_neg: Sigma1Family::empty("not-dom", dim + 1),
        sim: ComputableEquiv::Coordinate { arity: dim + 1, index: dim },
        rel_pos: rels(dim + 1, true),
        rel_neg: rels(dim + 1, false),
        reference: Some(ReferenceMap::Coordinate(dim)),
    };
    let star = EffectiveInterpretation {
        name: format!("star[{}]", f.name),
        source_sig: f.source_sig.clone(),
        target_sig: f.target_sig.clone(),
        dom_arity: dim + 2,
        dom_pos: Sigma1Family { name: "dom*".into(), free: dim + 2, body: FamilyBody::StarDomain { op: op.clone(), dim } },
        dom_neg: Sigma1Family {
            name: "not-dom*".into(),
            free: dim + 2,
            body: FamilyBody::StarDomainNeg { op: op.clone(), dim },
        },
        sim: ComputableEquiv::Coordinate { arity: dim + 2, index: dim },
        rel_pos: rels(dim + 2, true),
        rel_neg: rels(dim + 2, false),
        reference: Some(ReferenceMap::Coordinate(dim)),
    };
    FunctorInterpretation { sigma, star, dim }
}

/// Star-domain tuples `(ā, i, j)` for element `i`: `ā` runs over `i`
/// placed first or last among `others`, and `j` is the first certificate
/// found. Tuples not certified within the budget are dropped.
pub fn star_tuples(fi: &FunctorInterpretation, oracle: &dyn Oracle, i: &Nat, others: &[Nat], budget: u64) -> Vec<Vec<Nat>> {
    let mut params: Vec<Vec<Nat>> = Vec::new();
    for z in others {
        let mut p = vec![z.clone(); fi.dim];
        if fi.dim == 0 {
            params.push(p);
            break;
        }
        p[0] = i.clone();
        params.push(p.clone());
        let mut q = vec![z.clone(); fi.dim];
        q[fi.dim - 1] = i.clone();
        params.push(q);
    }
    params.dedup();
    let mut out = Vec::new();
    for p in params {
        let mut free = p.clone();
        free.push(i.clone());
        let Some((j, _)) = fi.sigma.dom_pos.candidates(&free).next() else { continue };
        free.push(j);
        if eval_sigma1_budget(&fi.star.dom_pos, oracle, &free, budget) == Membership::Yes {
            out.push(free);
        }
    }
    out
}

/// Equivalent pairs of star-domain tuple codes, at most `count`.
pub fn congruence_samples(
    fi: &FunctorInterpretation,
    oracle: &dyn Oracle,
    elems: &[Nat],
    per_element: usize,
    count: usize,
    budget: u64,
) -> Vec<(Nat, Nat)> {
    let mut out = Vec::new();
    for i in elems {
        let tuples: Vec<Nat> = star_tuples(fi, oracle, i, elems, budget)
            .into_iter()
            .take(per_element)
            .map(|t| enc_tuple(&t).0)
            .collect();
        for a in &tuples {
            for b in &tuples {
                if a != b && out.len() < count {
                    out.push((a.clone(), b.clone()));
                }
            }
        }
    }
    out
}

/// `F` against `I^F` for `I = functor_to_interp(F)`: the map
/// `i ↦ h(ā, i, j)` (the composite of ξ and the inverse of ζ) must be
/// injective and literal preserving on the first `prefix` elements of
/// `F(A)`, and commute with arrows for the sample isomorphism.
pub fn round_trip_report(
    f: &EnumerableFunctor,
    a: &SharedPresentation,
    dim: usize,
    sample: &Perm,
    bounds: &Bounds,
) -> Result<Report> {
    let mut report = Report::new(format!("round-trip {} on {}", f.name, a.name()));
    let fi = functor_to_interp(f, dim);
    let star = Arc::new(fi.star.clone());
    let back = interp_to_functor(star.clone(), &a.name());
    let oracle = DiagramOf(a.as_ref());
    let fe = Functor::Enumerable(f.clone());
    let be = Functor::Enumerable(back.clone());
    let f_img = functor_image(&fe, &oracle, bounds.budget);
    let b_img = functor_image(&be, &oracle, bounds.budget);
    let elems = f_img.elements(bounds.prefix, bounds.scan)?;
    let embed = programs::embed_coordinate(dim, 1);
    let map = |x: &Nat| embed.exec(&oracle, x, &Budget::new(bounds.budget)).ok();

    let (inj, lits) = unwrap_or_inconclusive(check_partial_iso(
        &f.target_sig,
        &elems,
        &map,
        &image_truth_fn(&f_img),
        &image_truth_fn(&b_img),
    ));
    report.push("xi-zeta-injective", inj);
    report.push("xi-zeta-literals", lits);

    // Def 1.5 square for the sample isomorphism `A -> Ã`.
    let copy: SharedPresentation = Arc::new(PermutedCopy::new(a.clone(), sample.clone()));
    let c_oracle = DiagramOf(copy.as_ref());
    let graph = PermGraph(sample);
    let f_arrow = functor_map_iso(&fe, &oracle, &graph, &c_oracle, bounds.budget);
    let b_arrow = functor_map_iso(&be, &oracle, &graph, &c_oracle, bounds.budget);
    let mut square = Verdict::Pass;
    for x in &elems {
        let lhs = f_arrow.apply(x).and_then(|y| map(&y));
        let rhs = map(x).and_then(|y| b_arrow.apply(&y));
        square = square.and(match (lhs, rhs) {
            (Some(l), Some(r)) if l == r => Verdict::Pass,
            (Some(_), Some(_)) => Verdict::Fail { witness: x.clone() },
            _ => Verdict::Inconclusive,
        });
    }
    report.push("square", square);

    // The Σ form certifies an element exactly when the star form does.
    let mut forms = Verdict::Pass;
    for x in &elems {
        let star_ok = !star_tuples(&fi, &oracle, x, &elems[..1.min(elems.len())], bounds.budget).is_empty();
        let mut free = vec![x.clone(); dim];
        free.push(x.clone());
        let sigma_ok = eval_sigma1_budget(&fi.sigma.dom_pos, &oracle, &free, bounds.budget) == Membership::Yes;
        if star_ok != sigma_ok {
            forms = Verdict::Fail { witness: x.clone() };
            break;
        }
    }
    report.push("sigma-star-agree", forms);
    Ok(report)
}

/// The congruence claim for the star form on `count` sampled pairs.
pub fn check_star_congruence(
    f: &EnumerableFunctor,
    a: &SharedPresentation,
    dim: usize,
    elems: usize,
    count: usize,
    budget: u64,
) -> Result<Verdict> {
    let fi = functor_to_interp(f, dim);
    let oracle = DiagramOf(a.as_ref());
    let points = a.elements(elems);
    let per = (1..).find(|k| points.len() * k * (k - 1) >= count).unwrap_or(2).min(2 * points.len());
    let samples = congruence_samples(&fi, &oracle, &points, per, count, budget);
    if samples.len() < count {
        return Ok(Verdict::Inconclusive);
    }
    check_congruence(&fi.star, &oracle, &samples, budget)
}

// ---------------------------------------------------------------------------
// Bi-transformations

/// Functors `F : C → D`, `G : D → C` with `Λ_A : A ≅ G(F(A))` and
/// `Λ_B : B ≅ F(G(B))`.
#[derive(Clone, Debug)]
pub struct BiTransformWitness {
    pub f: EnumerableFunctor,
    pub g: EnumerableFunctor,
    pub lambda_a: Arc<OracleProgram>,
    pub lambda_b: Arc<OracleProgram>,
}

#[derive(Clone, Debug)]
pub struct BiTransformUpgrade {
    pub f_prime: ComputableUpgrade,
    pub g_prime: ComputableUpgrade,
    pub gamma_a: Arc<OracleProgram>,
    pub gamma_b: Arc<OracleProgram>,
}

/// `Γ_A = G′(Θ) ∘ Ω^{F(·)} ∘ Λ_A` and symmetrically `Γ_B`.
pub fn bitransform_upgrade(w: &BiTransformWitness) -> BiTransformUpgrade {
    let f_prime = enum_to_computable(&w.f);
    let g_prime = enum_to_computable(&w.g);
    let gamma = |name: &str, lambda: &Arc<OracleProgram>, first: &EnumerableFunctor, fp: &ComputableUpgrade, sp: &ComputableUpgrade| {
        Arc::new(programs::chain(
            name,
            vec![
                Step { prog: lambda.clone(), view: ChainView::Base },
                Step { prog: sp.lambda.clone(), view: ChainView::Image(first.psi.clone()) },
                Step {
                    prog: sp.functor.phi_star.clone(),
                    view: ChainView::ImageJoin {
                        op: first.psi.clone(),
                        theta: fp.lambda.clone(),
                        decide: fp.functor.phi.clone(),
                    },
                },
            ],
        ))
    };
    let gamma_a = gamma("gamma-a", &w.lambda_a, &w.f, &f_prime, &g_prime);
    let gamma_b = gamma("gamma-b", &w.lambda_b, &w.g, &g_prime, &f_prime);
    BiTransformUpgrade { f_prime, g_prime, gamma_a, gamma_b }
}

fn map_checks(
    report: &mut Report,
    prefix: &str,
    sig: &Signature,
    elems: &[Nat],
    map: &dyn Fn(&Nat) -> Option<Nat>,
    src: &dyn Fn(&Fact) -> Result<Option<bool>>,
    dst: &dyn Fn(&Fact) -> Result<Option<bool>>,
) {
    let (inj, lits) = unwrap_or_inconclusive(check_partial_iso(sig, elems, map, src, dst));
    report.push(format!("{prefix}-injective"), inj);
    report.push(format!("{prefix}-literals"), lits);
}

/// Images of `elems` must be elements of the target.
fn lands_in(elems: &[Nat], map: &dyn Fn(&Nat) -> Option<Nat>, dst: &dyn Fn(&Fact) -> Result<Option<bool>>) -> Verdict {
    let mut v = Verdict::Pass;
    for x in elems {
        v = v.and(match map(x).map(|y| dst(&Fact::element(y))) {
            Some(Ok(Some(true))) => Verdict::Pass,
            Some(Ok(Some(false))) => Verdict::Fail { witness: x.clone() },
            _ => Verdict::Inconclusive,
        });
        if v.is_fail() {
            break;
        }
    }
    v
}

/// The pseudo-inverse preconditions on `A` and `B = F(A)`, then
/// bijectivity of `Γ_A` on `A`, of `Γ_B` on `F′(A)`, and the square
/// `Γ_B^{F′(A)} = F′(Γ_A^A)`, all on the first `prefix` elements.
pub fn verify_bitransform(
    w: &BiTransformWitness,
    up: &BiTransformUpgrade,
    a: &SharedPresentation,
    prefix: usize,
    budget: u64,
) -> Result<Report> {
    let mut report = Report::new(format!("bitransform {}/{} on {}", w.f.name, w.g.name, a.name()));
    let fe = Functor::Enumerable(w.f.clone());
    let ge = Functor::Enumerable(w.g.clone());
    let base = DiagramOf(a.as_ref());
    let run = |p: &OracleProgram, o: &dyn Oracle, x: &Nat| p.exec(o, x, &Budget::new(budget)).ok();

    // Λ_A : A → G(F(A)).
    let fa = ImageOracle { op: &w.f.psi, inner: &base };
    let gfa = functor_image(&ge, &fa, budget);
    let a_elems = a.elements(prefix);
    map_checks(
        &mut report,
        "pre-lambda-a",
        &w.f.source_sig,
        &a_elems,
        &|x| run(&w.lambda_a, &base, x),
        &presentation_truth(a),
        &image_truth_fn(&gfa),
    );
    // Λ_B : F(A) → F(G(F(A))).
    let fa_img = functor_image(&fe, &base, budget);
    let b_elems = fa_img.elements(prefix, 4 * prefix as u64 + 100)?;
    let gfa_oracle = ImageOracle { op: &w.g.psi, inner: &fa };
    let fgfa = functor_image(&fe, &gfa_oracle, budget);
    map_checks(
        &mut report,
        "pre-lambda-b",
        &w.f.target_sig,
        &b_elems,
        &|x| run(&w.lambda_b, &fa, x),
        &image_truth_fn(&fa_img),
        &image_truth_fn(&fgfa),
    );
    if report.has_failure() {
        report.note("pseudo-inverse precondition failed; upgraded maps not checked");
        return Ok(report);
    }

    // Γ_A : A → G′(F′(A)).
    let f1 = DecidedBy { prog: &up.f_prime.functor.phi, inner: &base };
    let g1f1 = DecidedBy { prog: &up.g_prime.functor.phi, inner: &f1 };
    let decided = |o: &dyn Oracle, f: &Fact| -> Result<Option<bool>> {
        Ok(o.query(&f.code().0, &Budget::new(budget)).ok())
    };
    let gamma_a = |x: &Nat| run(&up.gamma_a, &base, x);
    let into = lands_in(&a_elems, &gamma_a, &|f| decided(&g1f1, f));
    map_checks(&mut report, "gamma-a", &w.f.source_sig, &a_elems, &gamma_a, &presentation_truth(a), &|f| decided(&g1f1, f));
    report.push("gamma-a-lands", into);

    // Γ_B : F′(A) → F′(G′(F′(A))).
    let b1: Vec<Nat> = b_elems.iter().filter_map(|x| run(&up.f_prime.lambda, &base, x)).collect();
    let f1g1f1 = DecidedBy { prog: &up.f_prime.functor.phi, inner: &g1f1 };
    let gamma_b = |x: &Nat| run(&up.gamma_b, &f1, x);
    let into = lands_in(&b1, &gamma_b, &|f| decided(&f1g1f1, f));
    map_checks(&mut report, "gamma-b", &w.f.target_sig, &b1, &gamma_b, &|f| decided(&f1, f), &|f| decided(&f1g1f1, f));
    report.push("gamma-b-lands", into);

    // Γ_B^{F′(A)} against F′(Γ_A^A).
    let graph = GraphOf::new(&up.gamma_a, &base);
    let join = JoinOracle { left: &base, map: &graph, right: &g1f1 };
    let mut square = Verdict::Pass;
    for y in &b1 {
        let lhs = gamma_b(y);
        let rhs = run(&up.f_prime.functor.phi_star, &join, y);
        square = square.and(match (lhs, rhs) {
            (Some(l), Some(r)) if l == r => Verdict::Pass,
            (Some(_), Some(_)) => Verdict::Fail { witness: y.clone() },
            _ => Verdict::Inconclusive,
        });
    }
    report.push("square", square);
    Ok(report)
}

/// The complement functor on graphs paired with itself, `Λ` the identity.
pub fn complement_witness(source: &str) -> BiTransformWitness {
    let f = EnumerableFunctor::complement(source);
    BiTransformWitness {
        g: EnumerableFunctor { source: format!("complement({source})"), ..f.clone() },
        f,
        lambda_a: Arc::new(programs::identity()),
        lambda_b: Arc::new(programs::identity()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::nat;
    use crate::structures::builtin;

    fn show(r: &Report) {
        eprintln!("{}", r.render_text());
    }

    fn all_pass(r: &Report) -> bool {
        r.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }

    #[test]
    fn identity_on_pure_equality_upgrades() {
        let a = builtin("pure-equality").unwrap();
        let f = EnumerableFunctor::identity("pure-equality", Signature::empty());
        let up = enum_to_computable(&f);
        let r = verify_enum_to_computable(&f, &up, &a, &Bounds::default()).unwrap();
        show(&r);
        assert!(all_pass(&r));
    }

    #[test]
    fn complement_on_rado_upgrades() {
        let a = builtin("rado").unwrap();
        let f = EnumerableFunctor::complement("rado");
        let up = enum_to_computable(&f);
        let r = verify_enum_to_computable(&f, &up, &a, &Bounds::default()).unwrap();
        show(&r);
        assert!(all_pass(&r));
    }

    #[test]
    fn prepend_identities() {
        let r = check_prepend(&Arc::new(programs::evens()), &Arc::new(programs::divisible_rows()), 100, 10_000);
        show(&r);
        assert!(all_pass(&r));
    }

    #[test]
    fn pair_intersection_functor() {
        let i = Arc::new(EffectiveInterpretation::pair_intersection());
        let a = builtin("pure-equality").unwrap();
        let r = verify_interp_to_functor(&i, &a, 6, 300, &Bounds::default()).unwrap();
        show(&r);
        assert!(all_pass(&r));
    }

    #[test]
    fn round_trip_complement_rado() {
        let a = builtin("rado").unwrap();
        let f = EnumerableFunctor::complement("rado");
        let b = Bounds { prefix: 12, ..Bounds::default() };
        let r = round_trip_report(&f, &a, 2, &Perm::SwapPairs, &b).unwrap();
        show(&r);
        assert!(all_pass(&r));
    }

    #[test]
    fn star_congruence() {
        let a = builtin("rado").unwrap();
        let f = EnumerableFunctor::complement("rado");
        assert_eq!(check_star_congruence(&f, &a, 2, 10, 200, 10_000).unwrap(), Verdict::Pass);
    }

    #[test]
    fn bitransform_complement_rado() {
        let a = builtin("rado").unwrap();
        let w = complement_witness("rado");
        let up = bitransform_upgrade(&w);
        let r = verify_bitransform(&w, &up, &a, 20, 1_000_000).unwrap();
        show(&r);
        assert!(all_pass(&r));
    }

    #[test]
    fn constant_lambda_b_breaks_precondition() {
        let a = builtin("rado").unwrap();
        let mut w = complement_witness("rado");
        w.lambda_b = Arc::new(programs::constant(0));
        let up = bitransform_upgrade(&w);
        let r = verify_bitransform(&w, &up, &a, 20, 100_000).unwrap();
        assert_eq!(r.get("pre-lambda-b-injective"), Some(&Verdict::Fail { witness: nat(1) }));
    }
}
