//! Presentations of countable relational structures.
//!
//! A presentation answers truth queries for atomic facts. Its universe is
//! every natural unless it says otherwise; facts mentioning a non-element are
//! outside the diagram (both signs false). Finite presentations are admitted
//! for testing and report `is_finite`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::ToPrimitive;

use crate::coding::{decode_fact, dec_tuple, nat, Fact, FactCode, FactKind, Nat, TupleCode};
use crate::error::{Error, Result};

/// Relation count and arities of a relational language.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Signature {
    Finite(Vec<usize>),
    /// Relations `R0, R1, ...` all of the same arity.
    Unbounded { arity: usize },
}

/// Relations of an unbounded signature that finite restrictions enumerate.
pub const UNBOUNDED_RESTRICT_RELATIONS: u64 = 16;

impl Signature {
    pub fn empty() -> Self {
        Signature::Finite(Vec::new())
    }

    pub fn graph() -> Self {
        Signature::Finite(vec![2])
    }

    pub fn arity(&self, rel: u64) -> Option<usize> {
        match self {
            Signature::Finite(ar) => ar.get(rel.to_usize()?).copied(),
            Signature::Unbounded { arity } => Some(*arity),
        }
    }

    pub fn relation_count(&self) -> Option<usize> {
        match self {
            Signature::Finite(ar) => Some(ar.len()),
            Signature::Unbounded { .. } => None,
        }
    }

    /// Relation indices covered by finite restrictions.
    pub fn listed_relations(&self) -> Vec<(u64, usize)> {
        match self {
            Signature::Finite(ar) => ar.iter().enumerate().map(|(i, &a)| (i as u64, a)).collect(),
            Signature::Unbounded { arity } => {
                (0..UNBOUNDED_RESTRICT_RELATIONS).map(|i| (i, *arity)).collect()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = match self {
            Signature::Finite(ar) => ar.contains(&0),
            Signature::Unbounded { arity } => *arity == 0,
        };
        if bad {
            return Err(Error::InvalidInput("relation arity must be at least 1".into()));
        }
        Ok(())
    }

    /// Checks that `fact` is shaped for this signature.
    pub fn check(&self, fact: &Fact) -> Result<()> {
        if let Some(rel) = fact.rel {
            match self.arity(rel) {
                Some(a) if a == fact.args.len() => Ok(()),
                Some(a) => Err(Error::MalformedFact(format!(
                    "R{rel} has arity {a}, fact has {} arguments",
                    fact.args.len()
                ))),
                None => Err(Error::MalformedFact(format!("R{rel} is not in the signature"))),
            }
        } else {
            Ok(())
        }
    }
}

/// A stage-queryable atomic diagram.
pub trait Presentation: Send + Sync {
    fn name(&self) -> String;

    fn signature(&self) -> &Signature;

    fn contains(&self, _x: &Nat) -> bool {
        true
    }

    fn is_finite(&self) -> bool {
        false
    }

    /// Truth of the positive atom `R_rel(args)`; arguments are elements and
    /// the arity has been checked.
    fn holds(&self, rel: u64, args: &[Nat]) -> bool;

    /// The first `n` elements in increasing order.
    fn elements(&self, n: usize) -> Vec<Nat> {
        let mut out = Vec::with_capacity(n);
        let mut x = 0u64;
        // a finite universe must override this
        while out.len() < n {
            let e = nat(x);
            if self.contains(&e) {
                out.push(e);
            }
            x += 1;
        }
        out
    }

    fn truth(&self, fact: &Fact) -> Result<bool> {
        self.signature().check(fact)?;
        if !fact.args.iter().all(|a| self.contains(a)) {
            return Ok(false);
        }
        let positive = match fact.rel {
            None => fact.args[0] == fact.args[1],
            Some(rel) => self.holds(rel, &fact.args),
        };
        Ok(positive == fact.kind.is_positive())
    }
}

pub type SharedPresentation = Arc<dyn Presentation>;

impl fmt::Debug for dyn Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Presentation({})", self.name())
    }
}

pub fn fact_truth(p: &dyn Presentation, c: &FactCode) -> Result<bool> {
    let fact = decode_fact(c)?;
    p.truth(&fact)
}

/// Truth of a code as an oracle bit: malformed codes are simply absent.
pub fn diagram_bit(p: &dyn Presentation, c: &Nat) -> bool {
    fact_truth(p, &FactCode(c.clone())).unwrap_or(false)
}

pub fn diagram_prefix(p: &dyn Presentation, stage: u64) -> FiniteDiagram {
    let mut d = FiniteDiagram::default();
    for c in 0..stage {
        let code = FactCode(nat(c));
        if let Ok(fact) = decode_fact(&code) {
            if p.truth(&fact).unwrap_or(false) {
                for a in &fact.args {
                    d.support.insert(a.clone());
                }
                d.facts.insert(code, fact);
            }
        }
    }
    d
}

/// All facts of both signs whose arguments lie in `elems`.
pub fn restrict(p: &dyn Presentation, elems: &[Nat]) -> FiniteDiagram {
    let support: BTreeSet<Nat> = elems.iter().filter(|e| p.contains(e)).cloned().collect();
    let pts: Vec<Nat> = support.iter().cloned().collect();
    let mut d = FiniteDiagram { facts: BTreeMap::new(), support };
    for x in &pts {
        for y in &pts {
            d.insert(Fact::eq(x == y, x.clone(), y.clone()));
        }
    }
    for (rel, arity) in p.signature().listed_relations() {
        for args in tuples_over(&pts, arity) {
            let positive = p.holds(rel, &args);
            d.insert(Fact::rel(positive, rel, args));
        }
    }
    d
}

/// Every tuple of length `k` over `pts`, in lexicographic order of positions.
pub fn tuples_over(pts: &[Nat], k: usize) -> Vec<Vec<Nat>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(out.len() * pts.len());
        for t in &out {
            for p in pts {
                let mut t2 = t.clone();
                t2.push(p.clone());
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

/// A finite set of facts together with the elements it is about.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FiniteDiagram {
    pub facts: BTreeMap<FactCode, Fact>,
    pub support: BTreeSet<Nat>,
}

impl FiniteDiagram {
    pub fn from_facts<I: IntoIterator<Item = Fact>>(facts: I) -> Self {
        let mut d = FiniteDiagram::default();
        for f in facts {
            d.insert(f);
        }
        d
    }

    pub fn insert(&mut self, fact: Fact) {
        for a in &fact.args {
            self.support.insert(a.clone());
        }
        self.facts.insert(fact.code(), fact);
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.facts.contains_key(&fact.code())
    }

    pub fn contains_code(&self, c: &Nat) -> bool {
        self.facts.contains_key(&FactCode(c.clone()))
    }

    pub fn codes(&self) -> BTreeSet<Nat> {
        self.facts.keys().map(|c| c.0.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn is_subset(&self, other: &FiniteDiagram) -> bool {
        self.facts.keys().all(|c| other.facts.contains_key(c))
    }

    /// Whether the truth of `fact` is settled here, and if so its value.
    pub fn decides(&self, fact: &Fact) -> Option<bool> {
        if self.contains(fact) {
            Some(true)
        } else if self.contains(&fact.negation()) {
            Some(false)
        } else {
            None
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.facts.values().all(|f| {
            if self.contains(&f.negation()) {
                return false;
            }
            match (f.kind, f.rel) {
                (FactKind::PosEq, None) => f.args[0] == f.args[1],
                (FactKind::NegEq, None) => f.args[0] != f.args[1],
                _ => true,
            }
        })
    }

    /// Facts whose arguments all lie in `elems`.
    pub fn restrict_to(&self, elems: &BTreeSet<Nat>) -> FiniteDiagram {
        let mut d = FiniteDiagram {
            facts: BTreeMap::new(),
            support: self.support.intersection(elems).cloned().collect(),
        };
        for (c, f) in &self.facts {
            if f.args.iter().all(|a| elems.contains(a)) {
                d.facts.insert(c.clone(), f.clone());
            }
        }
        d
    }

    pub fn positive_relation_count(&self) -> usize {
        self.facts.values().filter(|f| f.kind == FactKind::PosRel).count()
    }
}

/// Injective finite map between naturals.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct PartialIso {
    pub mapping: BTreeMap<Nat, Nat>,
}

impl PartialIso {
    pub fn inverse(&self) -> PartialIso {
        PartialIso { mapping: self.mapping.iter().map(|(a, b)| (b.clone(), a.clone())).collect() }
    }

    pub fn is_injective(&self) -> bool {
        let range: BTreeSet<&Nat> = self.mapping.values().collect();
        range.len() == self.mapping.len()
    }

    /// Every literal over the domain decided by `d1` whose image is decided
    /// by `d2` gets the same verdict. Returns a violating fact if any.
    pub fn violation(&self, d1: &FiniteDiagram, d2: &FiniteDiagram) -> Option<Fact> {
        for f in d1.facts.values() {
            if !f.args.iter().all(|a| self.mapping.contains_key(a)) {
                continue;
            }
            let image = f.map_args(|a| self.mapping[a].clone());
            if d2.contains(&image.negation()) {
                return Some(f.clone());
            }
        }
        None
    }

    pub fn preserves(&self, d1: &FiniteDiagram, d2: &FiniteDiagram) -> bool {
        self.is_injective() && self.violation(d1, d2).is_none()
    }
}

/// Largest map size `find_partial_isos` will search.
pub const PARTIAL_ISO_SEARCH_LIMIT: usize = 8;

/// Every injective literal-preserving map of `size` elements from the
/// support of `d1` into the support of `d2`.
pub fn find_partial_isos(
    d1: &FiniteDiagram,
    d2: &FiniteDiagram,
    size: usize,
) -> Result<Vec<PartialIso>> {
    if size > PARTIAL_ISO_SEARCH_LIMIT {
        return Err(Error::SearchBudget(format!(
            "partial isomorphisms of size {size} exceed the limit {PARTIAL_ISO_SEARCH_LIMIT}"
        )));
    }
    let dom: Vec<Nat> = d1.support.iter().cloned().collect();
    let rng: Vec<Nat> = d2.support.iter().cloned().collect();
    let mut out = Vec::new();
    let mut current = PartialIso::default();
    let mut used = vec![false; rng.len()];
    extend_iso(d1, d2, &dom, &rng, 0, size, &mut current, &mut used, &mut out);
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn extend_iso(
    d1: &FiniteDiagram,
    d2: &FiniteDiagram,
    dom: &[Nat],
    rng: &[Nat],
    next: usize,
    size: usize,
    current: &mut PartialIso,
    used: &mut [bool],
    out: &mut Vec<PartialIso>,
) {
    if current.mapping.len() == size {
        out.push(current.clone());
        return;
    }
    let remaining = size - current.mapping.len();
    if dom.len() - next < remaining {
        return;
    }
    // skip dom[next]
    extend_iso(d1, d2, dom, rng, next + 1, size, current, used, out);
    let x = &dom[next];
    for (j, y) in rng.iter().enumerate() {
        if used[j] {
            continue;
        }
        current.mapping.insert(x.clone(), y.clone());
        if local_ok(d1, d2, current, x) {
            used[j] = true;
            extend_iso(d1, d2, dom, rng, next + 1, size, current, used, out);
            used[j] = false;
        }
        current.mapping.remove(x);
    }
}

/// Literals mentioning the newest element `x` are preserved.
fn local_ok(d1: &FiniteDiagram, d2: &FiniteDiagram, m: &PartialIso, x: &Nat) -> bool {
    d1.facts.values().all(|f| {
        if !f.args.contains(x) || !f.args.iter().all(|a| m.mapping.contains_key(a)) {
            return true;
        }
        let image = f.map_args(|a| m.mapping[a].clone());
        !d2.contains(&image.negation())
    })
}

// ---------------------------------------------------------------------------
// Built-in presentations

#[derive(Clone, Debug)]
pub struct PureEquality {
    sig: Signature,
}

impl Default for PureEquality {
    fn default() -> Self {
        PureEquality { sig: Signature::empty() }
    }
}

impl Presentation for PureEquality {
    fn name(&self) -> String {
        "pure-equality".into()
    }
    fn signature(&self) -> &Signature {
        &self.sig
    }
    fn holds(&self, _rel: u64, _args: &[Nat]) -> bool {
        false
    }
}

/// Graph presentations with symmetric edges and no loops.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphRule {
    /// `m < n` adjacent iff bit `m` of `n` is set.
    Rado,
    Complete,
    Empty,
}

#[derive(Clone, Debug)]
pub struct Graph {
    rule: GraphRule,
    sig: Signature,
}

impl Graph {
    pub fn new(rule: GraphRule) -> Self {
        Graph { rule, sig: Signature::graph() }
    }

    pub fn adjacent(&self, a: &Nat, b: &Nat) -> bool {
        if a == b {
            return false;
        }
        match self.rule {
            GraphRule::Complete => true,
            GraphRule::Empty => false,
            GraphRule::Rado => {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                match lo.to_u64() {
                    Some(bit) => hi.bit(bit),
                    None => false,
                }
            }
        }
    }
}

impl Presentation for Graph {
    fn name(&self) -> String {
        match self.rule {
            GraphRule::Rado => "rado".into(),
            GraphRule::Complete => "complete-graph".into(),
            GraphRule::Empty => "empty-graph".into(),
        }
    }
    fn signature(&self) -> &Signature {
        &self.sig
    }
    fn holds(&self, _rel: u64, args: &[Nat]) -> bool {
        self.adjacent(&args[0], &args[1])
    }
}

/// Element `n` is the `n`-th two-element set `{a < b}` in the order of the
/// tuple codes of `[a, b]`; two elements are adjacent iff the sets are
/// distinct and intersect.
#[derive(Debug)]
pub struct TriangularGraph {
    sig: Signature,
    table: Mutex<PairTable>,
}

#[derive(Debug, Default)]
struct PairTable {
    pairs: Vec<(Nat, Nat)>,
    index: BTreeMap<(Nat, Nat), usize>,
    next_code: u64,
}

impl PairTable {
    fn extend_until<F: Fn(&PairTable) -> bool>(&mut self, done: F) {
        while !done(self) {
            let t = dec_tuple(&TupleCode(nat(self.next_code)));
            self.next_code += 1;
            if t.len() == 2 && t[0] < t[1] {
                let p = (t[0].clone(), t[1].clone());
                self.index.insert(p.clone(), self.pairs.len());
                self.pairs.push(p);
            }
        }
    }
}

impl Default for TriangularGraph {
    fn default() -> Self {
        TriangularGraph { sig: Signature::graph(), table: Mutex::new(PairTable::default()) }
    }
}

impl TriangularGraph {
    pub fn pair_of(&self, n: usize) -> (Nat, Nat) {
        let mut t = self.table.lock().expect("pair table poisoned");
        t.extend_until(|t| t.pairs.len() > n);
        t.pairs[n].clone()
    }

    /// Element coding the set `{a, b}`, `a != b`.
    pub fn index_of(&self, a: &Nat, b: &Nat) -> Option<usize> {
        if a == b {
            return None;
        }
        let key = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        let code = crate::coding::enc_tuple(&[key.0.clone(), key.1.clone()]).0;
        let code = code.to_u64()?;
        let mut t = self.table.lock().expect("pair table poisoned");
        t.extend_until(|t| t.next_code > code);
        t.index.get(&key).copied()
    }
}

impl Presentation for TriangularGraph {
    fn name(&self) -> String {
        "triangular-graph".into()
    }
    fn signature(&self) -> &Signature {
        &self.sig
    }
    fn holds(&self, _rel: u64, args: &[Nat]) -> bool {
        if args[0] == args[1] {
            return false;
        }
        let (Some(i), Some(j)) = (args[0].to_usize(), args[1].to_usize()) else {
            return false;
        };
        let (a, b) = self.pair_of(i);
        let (c, d) = self.pair_of(j);
        a == c || a == d || b == c || b == d
    }
}

/// A finite structure listed fact by fact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteStructure {
    pub name: String,
    pub sig: Signature,
    pub universe: BTreeSet<Nat>,
    pub positive: BTreeSet<(u64, Vec<Nat>)>,
}

impl FiniteStructure {
    /// Builds the structure from a set of true facts. The universe is the set
    /// of elements `x` with `x = x` listed, plus every element mentioned.
    pub fn from_facts(name: &str, sig: Signature, facts: &[Fact]) -> Result<Self> {
        let mut universe = BTreeSet::new();
        let mut positive = BTreeSet::new();
        for f in facts {
            sig.check(f)?;
            universe.extend(f.args.iter().cloned());
            if f.kind == FactKind::PosRel {
                positive.insert((f.rel.unwrap_or(0), f.args.clone()));
            }
        }
        let s = FiniteStructure { name: name.to_string(), sig, universe, positive };
        for f in facts {
            if !s.truth(f)? {
                return Err(Error::InvalidInput(format!("inconsistent fact {f} in {name}")));
            }
        }
        Ok(s)
    }

    pub fn from_diagram(name: &str, sig: Signature, d: &FiniteDiagram) -> Result<Self> {
        let facts: Vec<Fact> = d.facts.values().cloned().collect();
        let mut s = FiniteStructure::from_facts(name, sig, &facts)?;
        s.universe.extend(d.support.iter().cloned());
        Ok(s)
    }

    /// Every true fact, as listed in structure files.
    pub fn all_facts(&self) -> FiniteDiagram {
        let pts: Vec<Nat> = self.universe.iter().cloned().collect();
        restrict(self, &pts)
    }
}

impl Presentation for FiniteStructure {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn signature(&self) -> &Signature {
        &self.sig
    }
    fn contains(&self, x: &Nat) -> bool {
        self.universe.contains(x)
    }
    fn is_finite(&self) -> bool {
        true
    }
    fn holds(&self, rel: u64, args: &[Nat]) -> bool {
        self.positive.contains(&(rel, args.to_vec()))
    }
    fn elements(&self, n: usize) -> Vec<Nat> {
        self.universe.iter().take(n).cloned().collect()
    }
}

/// A computable bijection of the naturals, used as a sample isomorphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Perm {
    Identity,
    /// `2k <-> 2k+1`.
    SwapPairs,
    /// Exchanges `a` and `b`.
    Transposition(Nat, Nat),
    /// Rotation of the initial segment `0..modulus` by `by`.
    Rotate { modulus: u64, by: u64 },
    Compose(Box<Perm>, Box<Perm>),
}

impl Perm {
    pub fn apply(&self, x: &Nat) -> Nat {
        match self {
            Perm::Identity => x.clone(),
            Perm::SwapPairs => {
                if x.bit(0) {
                    x - 1u32
                } else {
                    x + 1u32
                }
            }
            Perm::Transposition(a, b) => {
                if x == a {
                    b.clone()
                } else if x == b {
                    a.clone()
                } else {
                    x.clone()
                }
            }
            Perm::Rotate { modulus, by } => match x.to_u64() {
                Some(v) if v < *modulus => nat((v + by) % modulus),
                _ => x.clone(),
            },
            // first .0, then .1
            Perm::Compose(f, g) => g.apply(&f.apply(x)),
        }
    }

    pub fn inverse(&self) -> Perm {
        match self {
            Perm::Rotate { modulus, by } => {
                let m = (*modulus).max(1);
                Perm::Rotate { modulus: *modulus, by: (m - by % m) % m }
            }
            Perm::Compose(f, g) => Perm::Compose(Box::new(g.inverse()), Box::new(f.inverse())),
            other => other.clone(),
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Perm) -> Perm {
        Perm::Compose(Box::new(self.clone()), Box::new(next.clone()))
    }
}

/// The copy of `base` obtained by renaming every element through `perm`;
/// `perm` is then an isomorphism `base -> copy`.
pub struct PermutedCopy {
    pub base: SharedPresentation,
    pub perm: Perm,
    inverse: Perm,
}

impl PermutedCopy {
    pub fn new(base: SharedPresentation, perm: Perm) -> Self {
        let inverse = perm.inverse();
        PermutedCopy { base, perm, inverse }
    }
}

impl Presentation for PermutedCopy {
    fn name(&self) -> String {
        format!("{}∘{:?}", self.base.name(), self.perm)
    }
    fn signature(&self) -> &Signature {
        self.base.signature()
    }
    fn contains(&self, x: &Nat) -> bool {
        self.base.contains(&self.inverse.apply(x))
    }
    fn is_finite(&self) -> bool {
        self.base.is_finite()
    }
    fn holds(&self, rel: u64, args: &[Nat]) -> bool {
        let pre: Vec<Nat> = args.iter().map(|a| self.inverse.apply(a)).collect();
        self.base.holds(rel, &pre)
    }
}

/// Names accepted by `RULE` lines in structure files.
pub const BUILTIN_STRUCTURES: &[&str] =
    &["pure-equality", "rado", "complete-graph", "empty-graph", "triangular-graph"];

pub fn builtin(name: &str) -> Result<SharedPresentation> {
    Ok(match name {
        "pure-equality" => Arc::new(PureEquality::default()),
        "rado" => Arc::new(Graph::new(GraphRule::Rado)),
        "complete-graph" => Arc::new(Graph::new(GraphRule::Complete)),
        "empty-graph" => Arc::new(Graph::new(GraphRule::Empty)),
        "triangular-graph" => Arc::new(TriangularGraph::default()),
        other => return Err(Error::UnknownName(other.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{encode_fact, pair_u64};

    fn n(v: u64) -> Nat {
        nat(v)
    }

    #[test]
    fn rado_bit_rule() {
        let g = Graph::new(GraphRule::Rado);
        let q = encode_fact(FactKind::PosRel, Some(0), &[n(0), n(2)]).unwrap();
        assert!(!fact_truth(&g, &q).unwrap());
        assert!(g.adjacent(&n(0), &n(1)));
        assert!(g.adjacent(&n(1), &n(0)));
        assert!(!g.adjacent(&n(3), &n(3)));
    }

    #[test]
    fn equality_semantics_and_signature() {
        let p = PureEquality::default();
        let c = encode_fact(FactKind::PosEq, None, &[n(5), n(5)]).unwrap();
        assert!(fact_truth(&p, &c).unwrap());
        let r = encode_fact(FactKind::NegRel, Some(0), &[n(0), n(1)]).unwrap();
        assert!(matches!(fact_truth(&p, &r), Err(Error::MalformedFact(_))));
    }

    #[test]
    fn prefixes() {
        let p = PureEquality::default();
        assert!(diagram_prefix(&p, 0).is_empty());
        assert_eq!(diagram_prefix(&p, 1).codes(), [n(0)].into_iter().collect());
        let g = Graph::new(GraphRule::Rado);
        assert!(diagram_prefix(&g, 50).is_subset(&diagram_prefix(&g, 100)));
    }

    #[test]
    fn restrict_rado_two_points() {
        let g = Graph::new(GraphRule::Rado);
        let d = restrict(&g, &[n(2), n(0)]);
        let expect = [
            Fact::eq(true, n(0), n(0)),
            Fact::eq(true, n(2), n(2)),
            Fact::eq(false, n(0), n(2)),
            Fact::eq(false, n(2), n(0)),
            Fact::rel(false, 0, vec![n(0), n(2)]),
            Fact::rel(false, 0, vec![n(2), n(0)]),
            Fact::rel(false, 0, vec![n(0), n(0)]),
            Fact::rel(false, 0, vec![n(2), n(2)]),
        ];
        for f in &expect {
            assert!(d.contains(f), "missing {f}");
        }
        assert_eq!(d.len(), expect.len());
        assert!(restrict(&g, &[]).is_empty());
        assert!(restrict(&g, &[n(4)]).is_subset(&restrict(&g, &[n(4), n(9)])));
    }

    #[test]
    fn partial_iso_examples() {
        let p = PureEquality::default();
        let d = restrict(&p, &[n(0), n(1)]);
        let isos = find_partial_isos(&d, &d, 2).unwrap();
        assert_eq!(isos.len(), 2);
        assert_eq!(find_partial_isos(&d, &d, 0).unwrap(), vec![PartialIso::default()]);
        assert!(find_partial_isos(&d, &d, 9).is_err());

        // a path a-b-c against a triangle: no full-size match
        let g = Graph::new(GraphRule::Complete);
        let tri = restrict(&g, &[n(0), n(1), n(2)]);
        let e = Graph::new(GraphRule::Empty);
        let none = restrict(&e, &[n(0), n(1), n(2)]);
        assert_ne!(tri.positive_relation_count(), none.positive_relation_count());
        assert!(find_partial_isos(&tri, &none, 3).unwrap().is_empty());
    }

    #[test]
    fn triangular_enumeration() {
        let t = TriangularGraph::default();
        // [0,1] has code 4, the least code of an increasing pair
        assert_eq!(t.pair_of(0), (n(0), n(1)));
        for i in 0..20 {
            let (a, b) = t.pair_of(i);
            assert_eq!(t.index_of(&a, &b), Some(i));
            assert_eq!(t.index_of(&b, &a), Some(i));
        }
        let _ = pair_u64(0, 0);
    }

    #[test]
    fn permuted_copy_is_isomorphic() {
        let base: SharedPresentation = Arc::new(Graph::new(GraphRule::Rado));
        let perm = Perm::SwapPairs;
        let copy = PermutedCopy::new(base.clone(), perm.clone());
        for a in 0..12u64 {
            for b in 0..12u64 {
                assert_eq!(
                    base.holds(0, &[n(a), n(b)]),
                    copy.holds(0, &[perm.apply(&n(a)), perm.apply(&n(b))])
                );
            }
        }
        let rot = Perm::Rotate { modulus: 5, by: 2 };
        for x in 0..10u64 {
            assert_eq!(rot.inverse().apply(&rot.apply(&n(x))), n(x));
        }
    }

    #[test]
    fn finite_structures_flag_and_universe() {
        let g = Graph::new(GraphRule::Rado);
        let d = restrict(&g, &[n(0), n(1), n(2)]);
        let f = FiniteStructure::from_diagram("r3", Signature::graph(), &d).unwrap();
        assert!(f.is_finite());
        assert_eq!(f.elements(10).len(), 3);
        assert_eq!(f.all_facts(), d);
        let outside = Fact::eq(true, n(7), n(7));
        assert!(!f.truth(&outside).unwrap());
        assert!(!f.truth(&outside.negation()).unwrap());
    }
}
