//! Existential formula families, computable equivalences on tuple codes and
//! effective interpretations.
//!
//! A [`Sigma1Family`] is a stream of conjunctions of literals, one per
//! disjunct index. Families are either listed explicitly or derived from an
//! enumeration operator; derived families can point straight at the
//! disjuncts relevant to a given tuple, which is what keeps searches over
//! them finite in practice.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{ToPrimitive, Zero};

use crate::coding::{dec_fixed, dec_tuple, decode_fact, enc_fixed, enc_tuple, nat, pair, unpair, Fact, FactCode, Nat, TupleCode};
use crate::error::{Error, Result};
use crate::operators::{Axiom, Budget, EnumerationOperator, IndexedAxiom, Membership, Oracle, OutOfBudget, Producers};
use crate::report::Verdict;
use crate::structures::{FiniteDiagram, Signature};

// ---------------------------------------------------------------------------
// Formulas

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// Free variable `x<i>`.
    X(usize),
    /// Witness variable `y<i>`.
    Y(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Eq(Var, Var),
    Rel(u64, Vec<Var>),
    /// The variable denotes this very number.
    Is(Var, Nat),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub positive: bool,
    pub atom: Atom,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { positive: true, atom }
    }
    pub fn neg(atom: Atom) -> Self {
        Literal { positive: false, atom }
    }
    pub fn negated(&self) -> Self {
        Literal { positive: !self.positive, atom: self.atom.clone() }
    }

    fn vars(&self) -> Vec<Var> {
        match &self.atom {
            Atom::Eq(a, b) => vec![*a, *b],
            Atom::Rel(_, vs) => vs.clone(),
            Atom::Is(v, _) => vec![*v],
        }
    }
}

/// A conjunction of literals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct QFFormula {
    pub literals: Vec<Literal>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Disjunct {
    pub witnesses: usize,
    pub formula: QFFormula,
}

impl QFFormula {
    pub fn new(literals: Vec<Literal>) -> Self {
        QFFormula { literals }
    }

    /// Checks variable ranges and relation arities.
    pub fn check(&self, free: usize, witnesses: usize, sig: &Signature) -> Result<()> {
        for lit in &self.literals {
            for v in lit.vars() {
                let ok = match v {
                    Var::X(i) => i < free,
                    Var::Y(i) => i < witnesses,
                };
                if !ok {
                    return Err(Error::InvalidInput(format!("undeclared variable in {lit}")));
                }
            }
            if let Atom::Rel(r, vs) = &lit.atom {
                match sig.arity(*r) {
                    Some(a) if a == vs.len() => {}
                    _ => return Err(Error::InvalidInput(format!("{lit} does not fit the signature"))),
                }
            }
        }
        Ok(())
    }

    /// Facts asserted by the literals under an assignment, or `None` when an
    /// `Is` literal fails or a relation literal is ill-shaped.
    pub fn instantiate(&self, free: &[Nat], wit: &[Nat]) -> Option<Vec<Fact>> {
        let val = |v: &Var| -> Option<Nat> {
            match v {
                Var::X(i) => free.get(*i).cloned(),
                Var::Y(i) => wit.get(*i).cloned(),
            }
        };
        let mut out = Vec::with_capacity(self.literals.len());
        for lit in &self.literals {
            match &lit.atom {
                Atom::Is(v, n) => {
                    if (val(v)? == *n) != lit.positive {
                        return None;
                    }
                }
                Atom::Eq(a, b) => out.push(Fact::eq(lit.positive, val(a)?, val(b)?)),
                Atom::Rel(r, vs) => {
                    let args = vs.iter().map(val).collect::<Option<Vec<_>>>()?;
                    if args.is_empty() {
                        return None;
                    }
                    out.push(Fact::rel(lit.positive, *r, args));
                }
            }
        }
        Some(out)
    }

    /// Witness positions fixed by positive `Is` literals; `None` when two
    /// literals pin one witness to different values.
    fn pinned(&self, witnesses: usize) -> Option<Vec<Option<Nat>>> {
        let mut pins = vec![None; witnesses];
        for lit in &self.literals {
            if let (true, Atom::Is(Var::Y(i), n)) = (lit.positive, &lit.atom) {
                match &pins.get(*i)? {
                    Some(m) if m != n => return None,
                    _ => pins[*i] = Some(n.clone()),
                }
            }
        }
        Some(pins)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{i}"),
            Var::Y(i) => write!(f, "y{i}"),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.positive { '+' } else { '-' };
        match &self.atom {
            Atom::Eq(a, b) => write!(f, "{sign}Eq({a},{b})"),
            Atom::Is(a, n) => write!(f, "{sign}Is({a},{n})"),
            Atom::Rel(r, vs) => {
                let vs: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                write!(f, "{sign}R{r}({})", vs.join(","))
            }
        }
    }
}

impl fmt::Display for QFFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.literals.is_empty() {
            return f.write_str("true");
        }
        let parts: Vec<String> = self.literals.iter().map(|l| l.to_string()).collect();
        f.write_str(&parts.join(" & "))
    }
}

fn parse_var(s: &str) -> std::result::Result<Var, String> {
    let s = s.trim();
    let idx = |t: &str| t.parse::<usize>().map_err(|_| format!("bad variable `{s}`"));
    if let Some(t) = s.strip_prefix('x') {
        Ok(Var::X(idx(t)?))
    } else if let Some(t) = s.strip_prefix('y') {
        Ok(Var::Y(idx(t)?))
    } else {
        Err(format!("bad variable `{s}`"))
    }
}

impl FromStr for Literal {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let (positive, rest) = match s.chars().next() {
            Some('+') => (true, &s[1..]),
            Some('-') => (false, &s[1..]),
            _ => return Err(format!("literal `{s}` needs a sign")),
        };
        let open = rest.find('(').ok_or_else(|| format!("literal `{s}` lacks arguments"))?;
        if !rest.ends_with(')') {
            return Err(format!("literal `{s}` lacks `)`"));
        }
        let head = &rest[..open];
        let args: Vec<&str> = rest[open + 1..rest.len() - 1].split(',').collect();
        let atom = match head {
            "Eq" => {
                if args.len() != 2 {
                    return Err(format!("Eq takes two variables in `{s}`"));
                }
                Atom::Eq(parse_var(args[0])?, parse_var(args[1])?)
            }
            "Is" => {
                if args.len() != 2 {
                    return Err(format!("Is takes a variable and a number in `{s}`"));
                }
                let n = args[1].trim().parse::<Nat>().map_err(|_| format!("bad number in `{s}`"))?;
                Atom::Is(parse_var(args[0])?, n)
            }
            h if h.starts_with('R') => {
                let r = h[1..].parse::<u64>().map_err(|_| format!("bad relation `{h}`"))?;
                let vs = args.iter().map(|a| parse_var(a)).collect::<std::result::Result<Vec<_>, _>>()?;
                Atom::Rel(r, vs)
            }
            _ => return Err(format!("unknown atom `{head}`")),
        };
        Ok(Literal { positive, atom })
    }
}

impl FromStr for QFFormula {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "true" {
            return Ok(QFFormula::default());
        }
        let literals = s.split('&').map(str::parse).collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(QFFormula { literals })
    }
}

/// Whether every literal of `phi` holds in the finite diagram `d`.
pub fn eval_qf(phi: &QFFormula, d: &FiniteDiagram, free: &[Nat], witness: &[Nat]) -> Result<bool> {
    for v in free.iter().chain(witness) {
        if !d.support.contains(v) {
            return Err(Error::InvalidInput(format!("element {v} is outside the diagram's support")));
        }
    }
    Ok(match phi.instantiate(free, witness) {
        None => false,
        Some(facts) => facts.iter().all(|f| d.contains(f)),
    })
}

// ---------------------------------------------------------------------------
// Computable equivalences

/// The code of `[b, a]` for a pair code `[a, b]`.
fn swapped(x: &Nat) -> Option<Nat> {
    let t = dec_tuple(&TupleCode(x.clone()));
    (t.len() == 2).then(|| enc_tuple(&[t[1].clone(), t[0].clone()]).0)
}

/// A computable equivalence relation on tuple codes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComputableEquiv {
    CodeEquality,
    /// Pairs are compared as sets; other tuples by code.
    UnorderedPair,
    /// Tuples of this length agree on one coordinate; others by code.
    Coordinate { arity: usize, index: usize },
    /// Everything is equivalent. Only useful as a negative control.
    Constant,
    /// Listed classes; unlisted codes are singletons.
    Table(Vec<Vec<Nat>>),
}

impl ComputableEquiv {
    pub fn decide(&self, a: &Nat, b: &Nat) -> bool {
        self.least_code_closed(a) == self.least_code_closed(b)
    }

    fn least_code_closed(&self, x: &Nat) -> Nat {
        match self {
            ComputableEquiv::CodeEquality => x.clone(),
            ComputableEquiv::UnorderedPair => match swapped(x) {
                Some(y) if y < *x => y,
                _ => x.clone(),
            },
            ComputableEquiv::Coordinate { arity, index } => {
                let t = dec_tuple(&TupleCode(x.clone()));
                if t.len() == *arity && *index < *arity {
                    let mut m = vec![Nat::zero(); *arity];
                    m[*index] = t[*index].clone();
                    enc_tuple(&m).0
                } else {
                    x.clone()
                }
            }
            ComputableEquiv::Constant => Nat::zero(),
            ComputableEquiv::Table(classes) => classes
                .iter()
                .find(|c| c.contains(x))
                .and_then(|c| c.iter().min().cloned())
                .unwrap_or_else(|| x.clone()),
        }
    }

    /// Least code equivalent to `x`.
    pub fn least_code(&self, x: &Nat, budget: &Budget) -> Result<Nat, OutOfBudget> {
        budget.spend(1)?;
        Ok(self.least_code_closed(x))
    }

    /// The same value by unbounded search from 0; the reference for tests.
    pub fn least_code_search(&self, x: &Nat) -> Nat {
        let mut c = Nat::zero();
        while !self.decide(&c, x) {
            c += 1u32;
        }
        c
    }

    /// The `i`-th member of the class of `rep`, where member 0 is `rep`.
    /// `rep` must be a least code.
    pub fn class_member(&self, rep: &Nat, i: &Nat) -> Option<Nat> {
        match self {
            ComputableEquiv::CodeEquality => i.is_zero().then(|| rep.clone()),
            ComputableEquiv::UnorderedPair => match i.to_u64()? {
                0 => Some(rep.clone()),
                1 => swapped(rep).filter(|y| y != rep),
                _ => None,
            },
            ComputableEquiv::Coordinate { arity, index } => {
                let t = dec_tuple(&TupleCode(rep.clone()));
                if t.len() != *arity || *index >= *arity {
                    return i.is_zero().then(|| rep.clone());
                }
                let mut rest = dec_fixed(i, arity - 1);
                if *arity == 1 && !i.is_zero() {
                    return None;
                }
                rest.insert(*index, t[*index].clone());
                Some(enc_tuple(&rest).0)
            }
            ComputableEquiv::Constant => Some(i.clone()),
            ComputableEquiv::Table(classes) => {
                match classes.iter().find(|c| c.contains(rep)) {
                    Some(c) => {
                        let mut c = c.clone();
                        c.sort();
                        c.get(i.to_usize()?).cloned()
                    }
                    None => i.is_zero().then(|| rep.clone()),
                }
            }
        }
    }

    /// Members of the class of `rep`, starting with `rep`.
    pub fn class_members(&self, rep: &Nat) -> impl Iterator<Item = Nat> + '_ {
        let rep = rep.clone();
        (0u64..).map(move |i| self.class_member(&rep, &nat(i))).take_while(Option::is_some).flatten()
    }

    pub fn is_finite_classes(&self) -> bool {
        !matches!(self, ComputableEquiv::Constant | ComputableEquiv::Coordinate { .. })
    }
}

// ---------------------------------------------------------------------------
// Families

#[derive(Clone, Debug)]
pub enum FamilyBody {
    Explicit(Arc<Vec<Disjunct>>),
    /// Tuples `(a_0..a_{dim-1}, x)` such that `x = x` is enumerated from the
    /// diagram restricted to `ā`. Disjunct `pair(k, π)` reads axiom `k`
    /// with its support placed at the positions listed in `π`.
    OpDomain { op: Arc<EnumerationOperator>, dim: usize },
    /// Tuples `(ā, x, z)` with `z` naming a domain disjunct that holds.
    StarDomain { op: Arc<EnumerationOperator>, dim: usize },
    /// The complement of `StarDomain` among tuples of the same length.
    StarDomainNeg { op: Arc<EnumerationOperator>, dim: usize },
    /// Blocks of length `block`; coordinate `coord` of each block is the
    /// argument of a relation fact enumerated from the full diagram.
    /// Disjunct `k` is axiom `k`.
    OpRelation { op: Arc<EnumerationOperator>, rel: u64, positive: bool, arity: usize, block: usize, coord: usize },
}

#[derive(Clone, Debug)]
pub struct Sigma1Family {
    pub name: String,
    pub free: usize,
    pub body: FamilyBody,
}

type Candidates = Box<dyn Iterator<Item = (Nat, Disjunct)>>;
type Members = Box<dyn Iterator<Item = (Vec<Nat>, Nat, Disjunct)>>;

/// Round-robin interleaving of a stream of streams.
pub struct Dovetail<T> {
    outer: Box<dyn Iterator<Item = Box<dyn Iterator<Item = T>>>>,
    active: VecDeque<Box<dyn Iterator<Item = T>>>,
    outer_done: bool,
    queue: VecDeque<T>,
}

impl<T> Dovetail<T> {
    pub fn new(outer: Box<dyn Iterator<Item = Box<dyn Iterator<Item = T>>>>) -> Self {
        Dovetail { outer, active: VecDeque::new(), outer_done: false, queue: VecDeque::new() }
    }
}

impl<T> Iterator for Dovetail<T> {
    type Item = T;

    fn next(&mut self) -> Option<T> {
        loop {
            if let Some(t) = self.queue.pop_front() {
                return Some(t);
            }
            if !self.outer_done {
                match self.outer.next() {
                    Some(it) => self.active.push_back(it),
                    None => self.outer_done = true,
                }
            }
            if self.active.is_empty() && self.outer_done {
                return None;
            }
            let mut keep = VecDeque::with_capacity(self.active.len());
            while let Some(mut it) = self.active.pop_front() {
                if let Some(t) = it.next() {
                    self.queue.push_back(t);
                    keep.push_back(it);
                }
            }
            self.active = keep;
        }
    }
}

/// Distinct elements mentioned by the decoded facts, in increasing order.
fn support_of(facts: &[Fact]) -> Vec<Nat> {
    let s: BTreeSet<Nat> = facts.iter().flat_map(|f| f.args.iter().cloned()).collect();
    s.into_iter().collect()
}

fn decoded_alpha(ax: &Axiom) -> Option<Vec<Fact>> {
    ax.alpha.iter().map(|c| decode_fact(&FactCode(c.clone())).ok()).collect()
}

fn rename(fact: &Fact, var: &dyn Fn(&Nat) -> Var) -> Literal {
    let vars: Vec<Var> = fact.args.iter().map(var).collect();
    let atom = match fact.rel {
        None => Atom::Eq(vars[0], vars[1]),
        Some(r) => Atom::Rel(r, vars),
    };
    Literal { positive: fact.kind.is_positive(), atom }
}

/// Domain disjunct from axiom `k` and placement `π`.
fn op_domain_disjunct(op: &EnumerationOperator, dim: usize, j: &Nat) -> Option<Disjunct> {
    let (k, pc) = unpair(j);
    let ax = op.axiom(&k)?;
    let out = decode_fact(&FactCode(ax.output.clone())).ok()?;
    if out.kind != crate::coding::FactKind::PosEq || out.args[0] != out.args[1] {
        return None;
    }
    let alpha = decoded_alpha(&ax)?;
    let supp = support_of(&alpha);
    let pi: Vec<usize> = dec_tuple(&TupleCode(pc)).iter().map(|p| p.to_usize()).collect::<Option<_>>()?;
    if pi.len() != supp.len() || pi.iter().any(|&p| p >= dim) || pi.iter().collect::<BTreeSet<_>>().len() != pi.len() {
        return None;
    }
    let place: BTreeMap<&Nat, usize> = supp.iter().zip(pi.iter().copied()).collect();
    let mut lits = vec![Literal::pos(Atom::Is(Var::X(dim), out.args[0].clone()))];
    for (e, p) in &place {
        lits.push(Literal::pos(Atom::Is(Var::X(*p), (*e).clone())));
    }
    for f in &alpha {
        lits.push(rename(f, &|e| Var::X(place[e])));
    }
    Some(Disjunct { witnesses: 0, formula: QFFormula::new(lits) })
}

fn op_relation_disjunct(
    op: &EnumerationOperator,
    rel: u64,
    positive: bool,
    arity: usize,
    block: usize,
    coord: usize,
    j: &Nat,
) -> Option<Disjunct> {
    let ax = op.axiom(j)?;
    let out = decode_fact(&FactCode(ax.output.clone())).ok()?;
    if out.rel != Some(rel) || out.kind.is_positive() != positive || out.args.len() != arity {
        return None;
    }
    let alpha = decoded_alpha(&ax)?;
    let supp = support_of(&alpha);
    let place: BTreeMap<&Nat, usize> = supp.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut lits = Vec::new();
    for (m, e) in out.args.iter().enumerate() {
        lits.push(Literal::pos(Atom::Is(Var::X(m * block + coord), e.clone())));
    }
    for (e, i) in &place {
        lits.push(Literal::pos(Atom::Is(Var::Y(*i), (*e).clone())));
    }
    for f in &alpha {
        lits.push(rename(f, &|e| Var::Y(place[e])));
    }
    Some(Disjunct { witnesses: supp.len(), formula: QFFormula::new(lits) })
}

impl Sigma1Family {
    pub fn explicit(name: &str, free: usize, disjuncts: Vec<Disjunct>) -> Self {
        Sigma1Family { name: name.into(), free, body: FamilyBody::Explicit(Arc::new(disjuncts)) }
    }

    pub fn empty(name: &str, free: usize) -> Self {
        Sigma1Family::explicit(name, free, Vec::new())
    }

    /// Disjunct `j`, or `None` for a gap in the stream.
    pub fn disjunct(&self, j: &Nat) -> Option<Disjunct> {
        match &self.body {
            FamilyBody::Explicit(list) => list.get(j.to_usize()?).cloned(),
            FamilyBody::OpDomain { op, dim } => op_domain_disjunct(op, *dim, j),
            FamilyBody::StarDomain { op, dim } => {
                let mut d = op_domain_disjunct(op, *dim, j)?;
                d.formula.literals.push(Literal::pos(Atom::Is(Var::X(dim + 1), j.clone())));
                Some(d)
            }
            FamilyBody::StarDomainNeg { op, dim } => {
                let (jj, l) = unpair(j);
                let pin = Literal::pos(Atom::Is(Var::X(dim + 1), jj.clone()));
                match op_domain_disjunct(op, *dim, &jj) {
                    None if l.is_zero() => Some(Disjunct { witnesses: 0, formula: QFFormula::new(vec![pin]) }),
                    None => None,
                    Some(base) => {
                        let lit = base.formula.literals.get(l.to_usize()?)?;
                        Some(Disjunct { witnesses: 0, formula: QFFormula::new(vec![pin, lit.negated()]) })
                    }
                }
            }
            FamilyBody::OpRelation { op, rel, positive, arity, block, coord } => {
                op_relation_disjunct(op, *rel, *positive, *arity, *block, *coord, j)
            }
        }
    }

    pub fn explicit_len(&self) -> Option<usize> {
        match &self.body {
            FamilyBody::Explicit(l) => Some(l.len()),
            _ => None,
        }
    }

    /// Disjuncts that may hold of `free`. Every disjunct that holds of
    /// `free` is among them.
    pub fn candidates(&self, free: &[Nat]) -> Candidates {
        if free.len() != self.free {
            return Box::new(std::iter::empty());
        }
        match &self.body {
            FamilyBody::Explicit(list) => {
                let list = list.clone();
                Box::new((0..list.len()).map(move |j| (nat(j as u64), list[j].clone())))
            }
            FamilyBody::OpDomain { op, dim } => {
                let dim = *dim;
                let x = free[dim].clone();
                let avec: Vec<Nat> = free[..dim].to_vec();
                let op2 = op.clone();
                let it = op.producers(&Fact::element(x)).iter.filter_map(move |ia| {
                    let alpha = decoded_alpha(&ia.axiom)?;
                    let pi = support_of(&alpha)
                        .iter()
                        .map(|e| avec.iter().position(|a| a == e).map(|p| nat(p as u64)))
                        .collect::<Option<Vec<_>>>()?;
                    let j = pair(&ia.index, &enc_tuple(&pi).0);
                    op_domain_disjunct(&op2, dim, &j).map(|d| (j, d))
                });
                Box::new(it)
            }
            FamilyBody::StarDomain { .. } => {
                let j = free[self.free - 1].clone();
                Box::new(self.disjunct(&j).map(|d| (j, d)).into_iter())
            }
            FamilyBody::StarDomainNeg { op, dim } => {
                let jj = free[self.free - 1].clone();
                match op_domain_disjunct(op, *dim, &jj) {
                    None => {
                        let j = pair(&jj, &Nat::zero());
                        Box::new(self.disjunct(&j).map(|d| (j, d)).into_iter())
                    }
                    Some(base) => {
                        let fam = self.clone();
                        let n = base.formula.literals.len() as u64;
                        Box::new((0..n).filter_map(move |l| {
                            let j = pair(&jj, &nat(l));
                            fam.disjunct(&j).map(|d| (j, d))
                        }))
                    }
                }
            }
            FamilyBody::OpRelation { op, rel, positive, arity, block, coord } => {
                let xs: Vec<Nat> = (0..*arity).map(|m| free[m * block + coord].clone()).collect();
                let fam = self.clone();
                let target = Fact::rel(*positive, *rel, xs);
                Box::new(op.producers(&target).iter.filter_map(move |ia| {
                    fam.disjunct(&ia.index).map(|d| (ia.index, d))
                }))
            }
        }
    }

    /// Tuples equivalent blockwise to `reps`, paired with the disjuncts that
    /// may hold of them.
    pub fn member_candidates(&self, sim: &ComputableEquiv, reps: &[Vec<Nat>]) -> Members {
        let flat: Vec<Nat> = reps.iter().flatten().cloned().collect();
        if flat.len() != self.free {
            return Box::new(std::iter::empty());
        }
        match (&self.body, sim) {
            (FamilyBody::OpDomain { op, dim }, ComputableEquiv::Coordinate { arity, index })
            | (FamilyBody::StarDomain { op, dim }, ComputableEquiv::Coordinate { arity, index })
                if *arity == self.free && *index == *dim =>
            {
                let (op2, dim) = (op.clone(), *dim);
                let star = matches!(self.body, FamilyBody::StarDomain { .. });
                let x = flat[dim].clone();
                let it = op.producers(&Fact::element(x.clone())).iter.filter_map(move |ia| {
                    let supp = support_of(&decoded_alpha(&ia.axiom)?);
                    if supp.len() > dim {
                        return None;
                    }
                    let pi: Vec<Nat> = (0..supp.len() as u64).map(nat).collect();
                    let j = pair(&ia.index, &enc_tuple(&pi).0);
                    let mut member = supp;
                    member.resize(dim, Nat::zero());
                    member.push(x.clone());
                    let mut d = op_domain_disjunct(&op2, dim, &j)?;
                    if star {
                        member.push(j.clone());
                        d.formula.literals.push(Literal::pos(Atom::Is(Var::X(dim + 1), j.clone())));
                    }
                    Some((member, j, d))
                });
                Box::new(it)
            }
            (FamilyBody::OpRelation { block, coord, .. }, ComputableEquiv::Coordinate { arity, index })
                if arity == block && index == coord =>
            {
                // only the pinned coordinates matter, so the reps themselves serve
                Box::new(self.candidates(&flat).map(move |(j, d)| (flat.clone(), j, d)))
            }
            _ => {
                let fam = self.clone();
                let sim = sim.clone();
                let reps: Vec<Nat> = reps.iter().map(|b| enc_tuple(b).0).collect();
                let combos: Box<dyn Iterator<Item = Vec<Nat>>> = if sim.is_finite_classes() {
                    let mut all = vec![Vec::new()];
                    for r in &reps {
                        let ms: Vec<Nat> = sim.class_members(r).collect();
                        all = all
                            .into_iter()
                            .flat_map(|t: Vec<Nat>| {
                                ms.iter().map(move |m| {
                                    let mut t2 = t.clone();
                                    t2.extend(dec_tuple(&TupleCode(m.clone())));
                                    t2
                                })
                            })
                            .collect();
                    }
                    Box::new(all.into_iter())
                } else {
                    // class indices in dovetail order
                    let k = reps.len();
                    Box::new((0u64..).filter_map(move |n| {
                        let idx = dec_fixed(&nat(n), k);
                        let mut flat = Vec::new();
                        for (r, i) in reps.iter().zip(&idx) {
                            flat.extend(dec_tuple(&TupleCode(sim.class_member(r, i)?)));
                        }
                        Some(flat)
                    }))
                };
                let outer = combos.map(move |flat: Vec<Nat>| {
                    let f2 = flat.clone();
                    Box::new(fam.candidates(&flat).map(move |(j, d)| (f2.clone(), j, d)))
                        as Box<dyn Iterator<Item = (Vec<Nat>, Nat, Disjunct)>>
                });
                Box::new(Dovetail::new(Box::new(outer)))
            }
        }
    }
}

/// Witness assignments for a disjunct: pinned witnesses fixed, the rest
/// enumerated over every tuple of naturals.
fn witness_stream(d: &Disjunct) -> Box<dyn Iterator<Item = Vec<Nat>>> {
    let Some(pins) = d.formula.pinned(d.witnesses) else {
        return Box::new(std::iter::empty());
    };
    let free_slots: Vec<usize> = (0..pins.len()).filter(|i| pins[*i].is_none()).collect();
    if free_slots.is_empty() {
        let w: Vec<Nat> = pins.into_iter().map(|p| p.unwrap()).collect();
        return Box::new(std::iter::once(w));
    }
    Box::new((0u64..).map(move |n| {
        let vals = dec_fixed(&nat(n), free_slots.len());
        let mut w: Vec<Nat> = pins.iter().map(|p| p.clone().unwrap_or_default()).collect();
        for (slot, v) in free_slots.iter().zip(vals) {
            w[*slot] = v;
        }
        w
    }))
}

/// Witness assignments ranging over a finite support.
fn witness_over(d: &Disjunct, support: &[Nat]) -> Vec<Vec<Nat>> {
    let Some(pins) = d.formula.pinned(d.witnesses) else {
        return Vec::new();
    };
    let mut out = vec![Vec::new()];
    for p in pins {
        let choices: Vec<Nat> = match p {
            Some(v) => vec![v],
            None => support.to_vec(),
        };
        out = out
            .into_iter()
            .flat_map(|w: Vec<Nat>| {
                choices.iter().map(move |c| {
                    let mut w2 = w.clone();
                    w2.push(c.clone());
                    w2
                })
            })
            .collect();
    }
    out
}

/// Consistent diagram asserted by a disjunct, as sorted fact codes.
fn alpha_of(d: &Disjunct, free: &[Nat], wit: &[Nat]) -> Option<Vec<Nat>> {
    let facts = d.formula.instantiate(free, wit)?;
    let mut codes = BTreeSet::new();
    for f in &facts {
        if f.rel.is_none() && (f.args[0] == f.args[1]) != f.kind.is_positive() {
            return None;
        }
        codes.insert(f.code().0);
    }
    for f in &facts {
        if codes.contains(&f.negation().code().0) {
            return None;
        }
    }
    Some(codes.into_iter().collect())
}

/// Yes iff some disjunct with index below `j_bound` holds of `free` with
/// witnesses from the support of `d`.
pub fn eval_sigma1_finite(fam: &Sigma1Family, d: &FiniteDiagram, free: &[Nat], j_bound: &Nat) -> Membership {
    if free.iter().any(|v| !d.support.contains(v)) {
        return Membership::Inconclusive;
    }
    let support: Vec<Nat> = d.support.iter().cloned().collect();
    for (j, dj) in fam.candidates(free) {
        if j >= *j_bound {
            if fam.explicit_len().is_some() {
                break;
            }
            continue;
        }
        for w in witness_over(&dj, &support) {
            if eval_qf(&dj.formula, d, free, &w).unwrap_or(false) {
                return Membership::Yes;
            }
        }
    }
    Membership::Inconclusive
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchResult {
    Yes { j: Nat, witness: Vec<Nat> },
    /// Every candidate was checked and none holds.
    No,
    OutOfBudget,
}

/// Dovetailed search for a disjunct and witnesses holding in `oracle`.
pub fn sigma1_search(fam: &Sigma1Family, oracle: &dyn Oracle, free: &[Nat], budget: &Budget) -> SearchResult {
    let free_v = free.to_vec();
    let outer = fam.candidates(free).map(move |(j, d)| {
        let (f2, j2) = (free_v.clone(), j.clone());
        Box::new(witness_stream(&d).map(move |w| (j2.clone(), d.clone(), w, f2.clone())))
            as Box<dyn Iterator<Item = (Nat, Disjunct, Vec<Nat>, Vec<Nat>)>>
    });
    let mut all = Dovetail::new(Box::new(outer));
    loop {
        let Some((j, d, w, f)) = all.next() else {
            return SearchResult::No;
        };
        if budget.spend(1).is_err() {
            return SearchResult::OutOfBudget;
        }
        let Some(facts) = d.formula.instantiate(&f, &w) else { continue };
        let mut holds = true;
        for fact in &facts {
            match oracle.query(&fact.code().0, budget) {
                Ok(true) => {}
                Ok(false) => {
                    holds = false;
                    break;
                }
                Err(OutOfBudget) => return SearchResult::OutOfBudget,
            }
        }
        if holds {
            return SearchResult::Yes { j, witness: w };
        }
    }
}

/// Budgeted semi-decision of `fam(free)` in a presentation.
pub fn eval_sigma1_budget(fam: &Sigma1Family, oracle: &dyn Oracle, free: &[Nat], budget: u64) -> Membership {
    match sigma1_search(fam, oracle, free, &Budget::new(budget)) {
        SearchResult::Yes { .. } => Membership::Yes,
        _ => Membership::Inconclusive,
    }
}

// ---------------------------------------------------------------------------
// Interpretations

/// Map from domain tuples to the elements of a reference copy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReferenceMap {
    /// The tuple's coordinate at this index.
    Coordinate(usize),
    /// A pair `[a, b]` goes to the index of `{a, b}` in the triangular graph.
    TriangularIndex,
}

#[derive(Clone, Debug)]
pub struct EffectiveInterpretation {
    pub name: String,
    /// Language of the structure the interpretation lives in.
    pub source_sig: Signature,
    pub target_sig: Signature,
    /// Length of domain tuples.
    pub dom_arity: usize,
    pub dom_pos: Sigma1Family,
    pub dom_neg: Sigma1Family,
    pub sim: ComputableEquiv,
    pub rel_pos: Vec<Sigma1Family>,
    pub rel_neg: Vec<Sigma1Family>,
    pub reference: Option<ReferenceMap>,
}

fn v(i: usize) -> Var {
    Var::X(i)
}

fn eq(positive: bool, a: usize, b: usize) -> Literal {
    Literal { positive, atom: Atom::Eq(v(a), v(b)) }
}

fn qf(lits: Vec<Literal>) -> Disjunct {
    Disjunct { witnesses: 0, formula: QFFormula::new(lits) }
}

impl EffectiveInterpretation {
    pub fn validate(&self) -> Result<()> {
        let relations = self.target_sig.listed_relations();
        if self.rel_pos.len() != relations.len() || self.rel_neg.len() != relations.len() {
            return Err(Error::InvalidInput(format!(
                "interpretation {} needs one positive and one negative family per target relation",
                self.name
            )));
        }
        if self.dom_pos.free != self.dom_arity || self.dom_neg.free != self.dom_arity {
            return Err(Error::InvalidInput(format!("interpretation {}: domain families have the wrong arity", self.name)));
        }
        for ((r, a), (p, n)) in relations.iter().zip(self.rel_pos.iter().zip(&self.rel_neg)) {
            if p.free != a * self.dom_arity || n.free != a * self.dom_arity {
                return Err(Error::InvalidInput(format!("interpretation {}: R{r} families have the wrong arity", self.name)));
            }
        }
        for fam in [&self.dom_pos, &self.dom_neg].into_iter().chain(&self.rel_pos).chain(&self.rel_neg) {
            if let FamilyBody::Explicit(list) = &fam.body {
                for d in list.iter() {
                    d.formula.check(fam.free, d.witnesses, &self.source_sig)?;
                }
            }
        }
        Ok(())
    }

    /// Pure equality (or a graph) interpreted in itself on 1-tuples.
    pub fn identity(sig: Signature) -> Self {
        let relations = sig.listed_relations();
        let rel = |positive: bool, r: u64, a: usize| {
            let lit = Literal { positive, atom: Atom::Rel(r, (0..a).map(v).collect()) };
            Sigma1Family::explicit(&format!("{}R{r}", if positive { "" } else { "not-" }), a, vec![qf(vec![lit])])
        };
        EffectiveInterpretation {
            name: "identity".into(),
            source_sig: sig.clone(),
            target_sig: sig,
            dom_arity: 1,
            dom_pos: Sigma1Family::explicit("dom", 1, vec![qf(vec![eq(true, 0, 0)])]),
            dom_neg: Sigma1Family::explicit("not-dom", 1, vec![qf(vec![eq(false, 0, 0)])]),
            sim: ComputableEquiv::CodeEquality,
            rel_pos: relations.iter().map(|&(r, a)| rel(true, r, a)).collect(),
            rel_neg: relations.iter().map(|&(r, a)| rel(false, r, a)).collect(),
            reference: Some(ReferenceMap::Coordinate(0)),
        }
    }

    /// Unordered pairs of distinct elements of pure equality, adjacent when
    /// they share exactly one element.
    pub fn pair_intersection() -> Self {
        let dom = || vec![eq(false, 0, 1), eq(false, 2, 3)];
        let with = |extra: Vec<Literal>| {
            let mut l = dom();
            l.extend(extra);
            qf(l)
        };
        let rel_pos = vec![
            with(vec![eq(true, 0, 2), eq(false, 1, 3)]),
            with(vec![eq(true, 0, 3), eq(false, 1, 2)]),
            with(vec![eq(true, 1, 2), eq(false, 0, 3)]),
            with(vec![eq(true, 1, 3), eq(false, 0, 2)]),
        ];
        let rel_neg = vec![
            with(vec![eq(false, 0, 2), eq(false, 0, 3), eq(false, 1, 2), eq(false, 1, 3)]),
            with(vec![eq(true, 0, 2), eq(true, 1, 3)]),
            with(vec![eq(true, 0, 3), eq(true, 1, 2)]),
        ];
        EffectiveInterpretation {
            name: "pair-intersection".into(),
            source_sig: Signature::empty(),
            target_sig: Signature::graph(),
            dom_arity: 2,
            dom_pos: Sigma1Family::explicit("pair", 2, vec![qf(vec![eq(false, 0, 1)])]),
            dom_neg: Sigma1Family::explicit("not-pair", 2, vec![qf(vec![eq(true, 0, 1)])]),
            sim: ComputableEquiv::UnorderedPair,
            rel_pos: vec![Sigma1Family::explicit("meets", 4, rel_pos)],
            rel_neg: vec![Sigma1Family::explicit("not-meets", 4, rel_neg)],
            reference: Some(ReferenceMap::TriangularIndex),
        }
    }

    /// The pair-intersection interpretation with every tuple equivalent.
    pub fn broken_sim() -> Self {
        EffectiveInterpretation { name: "broken-sim".into(), sim: ComputableEquiv::Constant, ..Self::pair_intersection() }
    }

    pub fn relation_count(&self) -> usize {
        self.rel_pos.len()
    }

    fn relation_arity(&self, r: usize) -> usize {
        self.rel_pos[r].free / self.dom_arity.max(1)
    }

    /// `h`: least code equivalent to a tuple code.
    pub fn h(&self, tuple: &Nat) -> Nat {
        self.sim.least_code(tuple, &Budget::new(1)).expect("closed form needs one step")
    }

    fn rep_tuple(&self, x: &Nat) -> Option<Vec<Nat>> {
        let t = dec_tuple(&TupleCode(x.clone()));
        (t.len() == self.dom_arity && self.h(x) == *x).then_some(t)
    }

    fn family(&self, sel: &Nat) -> Option<(&Sigma1Family, Option<(u64, bool)>)> {
        let s = sel.to_u64()?;
        match s {
            0 => Some((&self.dom_pos, None)),
            1 => None,
            _ => {
                let r = (s - 2) / 2;
                let positive = (s - 2) % 2 == 0;
                let fams = if positive { &self.rel_pos } else { &self.rel_neg };
                let rel = self.target_sig.listed_relations().get(r as usize)?.0;
                Some((fams.get(r as usize)?, Some((rel, positive))))
            }
        }
    }

    /// Axiom `k` of the operator read off this interpretation.
    ///
    /// `k = pair(sel, rest)`. Selector 0 is a domain axiom, 1 combines two
    /// domain axioms into an inequality, `2 + 2r` and `3 + 2r` are the
    /// positive and negative axioms of relation `r`.
    pub fn synthesized_axiom(&self, k: &Nat) -> Option<Axiom> {
        let (sel, rest) = unpair(k);
        if sel == nat(1) {
            let (a, b) = unpair(&rest);
            let (ax, ay) = (self.synthesized_axiom(&pair(&Nat::zero(), &a))?, self.synthesized_axiom(&pair(&Nat::zero(), &b))?);
            let (x, y) = (decode_fact(&FactCode(ax.output)).ok()?, decode_fact(&FactCode(ay.output)).ok()?);
            if x.args[0] == y.args[0] {
                return None;
            }
            let mut alpha: BTreeSet<Nat> = ax.alpha.into_iter().collect();
            alpha.extend(ay.alpha);
            let alpha: Vec<Nat> = alpha.into_iter().collect();
            if !consistent_codes(&alpha) {
                return None;
            }
            let out = Fact::eq(false, x.args[0].clone(), y.args[0].clone());
            return Some(Axiom { alpha, output: out.code().0 });
        }
        let (fam, rel) = self.family(&sel)?;
        let parts = dec_fixed(&rest, 3);
        let free = dec_tuple(&TupleCode(parts[0].clone()));
        if free.len() != fam.free {
            return None;
        }
        let d = fam.disjunct(&parts[1])?;
        let wit = dec_tuple(&TupleCode(parts[2].clone()));
        if wit.len() != d.witnesses {
            return None;
        }
        let alpha = alpha_of(&d, &free, &wit)?;
        let n = self.dom_arity;
        let hs: Vec<Nat> = free.chunks(n.max(1)).map(|b| self.h(&enc_tuple(b).0)).collect();
        let output = match rel {
            None => Fact::element(hs[0].clone()),
            Some((r, positive)) => Fact::rel(positive, r, hs),
        };
        Some(Axiom { alpha, output: output.code().0 })
    }

    /// Producers of `target` in the synthesized operator.
    pub fn synthesized_producers(this: &Arc<Self>, target: &Fact) -> Producers {
        let Some(reps) = target.args.iter().map(|x| this.rep_tuple(x)).collect::<Option<Vec<_>>>() else {
            return Producers::none();
        };
        match (target.rel, target.kind) {
            (None, crate::coding::FactKind::PosEq) => {
                if target.args[0] != target.args[1] {
                    return Producers::none();
                }
                Self::family_producers(this, nat(0), &this.dom_pos, &reps[..1])
            }
            (None, crate::coding::FactKind::NegEq) => {
                if target.args[0] == target.args[1] {
                    return Producers::none();
                }
                let xs = Self::family_producers(this, nat(0), &this.dom_pos, &reps[..1]);
                let ys = Self::family_producers(this, nat(0), &this.dom_pos, &reps[1..]);
                // one domain certificate per side is enough
                let (Some(a), Some(b)) = (xs.iter.take(1).next(), ys.iter.take(1).next()) else {
                    return Producers::none();
                };
                let (_, ra) = unpair(&a.index);
                let (_, rb) = unpair(&b.index);
                let index = pair(&nat(1), &pair(&ra, &rb));
                match this.synthesized_axiom(&index) {
                    Some(axiom) => Producers::single(IndexedAxiom { index, axiom }),
                    None => Producers::none(),
                }
            }
            (Some(rel), kind) => {
                let Some(r) = this.target_sig.listed_relations().iter().position(|(q, _)| *q == rel) else {
                    return Producers::none();
                };
                if reps.len() != this.relation_arity(r) {
                    return Producers::none();
                }
                let positive = kind.is_positive();
                let sel = nat(2 + 2 * r as u64 + u64::from(!positive));
                let fam = if positive { &this.rel_pos[r] } else { &this.rel_neg[r] };
                Self::family_producers(this, sel, fam, &reps)
            }
            _ => Producers::none(),
        }
    }

    fn family_producers(this: &Arc<Self>, sel: Nat, fam: &Sigma1Family, reps: &[Vec<Nat>]) -> Producers {
        let me = this.clone();
        let outer = fam.member_candidates(&this.sim, reps).map(move |(member, j, d)| {
            let (me, sel) = (me.clone(), sel.clone());
            let t = enc_tuple(&member).0;
            Box::new(witness_stream(&d).filter_map(move |w| {
                let alpha = alpha_of(&d, &member, &w)?;
                let index = pair(&sel, &enc_fixed(&[t.clone(), j.clone(), enc_tuple(&w).0]));
                let axiom = me.synthesized_axiom(&index)?;
                debug_assert_eq!(axiom.alpha, alpha);
                Some(IndexedAxiom { index, axiom })
            })) as Box<dyn Iterator<Item = IndexedAxiom>>
        });
        Producers { ordered: false, iter: Box::new(Dovetail::new(Box::new(outer))) }
    }
}

fn consistent_codes(codes: &[Nat]) -> bool {
    let set: BTreeSet<&Nat> = codes.iter().collect();
    codes.iter().all(|c| match decode_fact(&FactCode(c.clone())) {
        Ok(f) => !set.contains(&f.negation().code().0),
        Err(_) => false,
    })
}

/// Certified truth of a family and its complement: `Some(true)` when the
/// positive family holds, `Some(false)` when the negative one does.
fn decide_pair(
    pos: &Sigma1Family,
    neg: &Sigma1Family,
    oracle: &dyn Oracle,
    free: &[Nat],
    budget: u64,
) -> Result<Option<bool>> {
    let p = matches!(sigma1_search(pos, oracle, free, &Budget::new(budget)), SearchResult::Yes { .. });
    let n = matches!(sigma1_search(neg, oracle, free, &Budget::new(budget)), SearchResult::Yes { .. });
    match (p, n) {
        (true, true) => Err(Error::InterpretationIllFormed { code: enc_tuple(free).0.to_string() }),
        (true, false) => Ok(Some(true)),
        (false, true) => Ok(Some(false)),
        (false, false) => Ok(None),
    }
}

/// Domain tuples below a code bound grouped into classes, with the
/// relations decided on representatives.
#[derive(Clone, Debug)]
pub struct QuotientFragment {
    /// Over `0..reps.len()`.
    pub diagram: FiniteDiagram,
    /// Least certified code of each class, increasing.
    pub reps: Vec<Nat>,
    /// Every certified domain code to its class index.
    pub class_of: BTreeMap<Nat, usize>,
    pub excluded: usize,
    /// Codes of the right length with neither domain family certified.
    pub unsampled: usize,
    pub undecided_facts: usize,
}

pub fn build_quotient_fragment(
    interp: &EffectiveInterpretation,
    oracle: &dyn Oracle,
    tuple_code_bound: u64,
    budget: u64,
) -> Result<QuotientFragment> {
    let mut members: Vec<Nat> = Vec::new();
    let (mut excluded, mut unsampled) = (0, 0);
    for c in 0..tuple_code_bound {
        let code = nat(c);
        let t = dec_tuple(&TupleCode(code.clone()));
        if t.len() != interp.dom_arity {
            continue;
        }
        match decide_pair(&interp.dom_pos, &interp.dom_neg, oracle, &t, budget)? {
            Some(true) => members.push(code),
            Some(false) => excluded += 1,
            None => unsampled += 1,
        }
    }
    let mut reps: Vec<Nat> = Vec::new();
    let mut class_of = BTreeMap::new();
    for m in &members {
        let idx = match reps.iter().position(|r| interp.sim.decide(r, m)) {
            Some(i) => i,
            None => {
                reps.push(m.clone());
                reps.len() - 1
            }
        };
        class_of.insert(m.clone(), idx);
    }
    let mut diagram = FiniteDiagram::default();
    let k = reps.len();
    for i in 0..k {
        for j in 0..k {
            diagram.insert(Fact::eq(i == j, nat(i as u64), nat(j as u64)));
        }
    }
    let tuples: Vec<Vec<Nat>> = reps.iter().map(|r| dec_tuple(&TupleCode(r.clone()))).collect();
    let mut undecided = 0;
    for (r, (rel, arity)) in interp.target_sig.listed_relations().into_iter().enumerate() {
        if r >= interp.relation_count() {
            break;
        }
        for idx in crate::structures::tuples_over(&(0..k as u64).map(nat).collect::<Vec<_>>(), arity) {
            let flat: Vec<Nat> = idx.iter().flat_map(|i| tuples[i.to_usize().unwrap()].clone()).collect();
            match decide_pair(&interp.rel_pos[r], &interp.rel_neg[r], oracle, &flat, budget)? {
                Some(b) => diagram.insert(Fact::rel(b, rel, idx)),
                None => undecided += 1,
            }
        }
    }
    Ok(QuotientFragment { diagram, reps, class_of, excluded, unsampled, undecided_facts: undecided })
}

/// Partners each sampled pair is tested against.
pub const CONGRUENCE_PARTNERS: usize = 40;

/// For each sampled pair of equivalent domain tuples, compares relation
/// memberships against the least sampled domain tuples as partners. A
/// failure carries `pair(t1, t2)`.
pub fn check_congruence(
    interp: &EffectiveInterpretation,
    oracle: &dyn Oracle,
    samples: &[(Nat, Nat)],
    budget: u64,
) -> Result<Verdict> {
    let in_dom = |c: &Nat| -> Result<Option<Vec<Nat>>> {
        let t = dec_tuple(&TupleCode(c.clone()));
        if t.len() != interp.dom_arity {
            return Ok(None);
        }
        Ok((decide_pair(&interp.dom_pos, &interp.dom_neg, oracle, &t, budget)? == Some(true)).then_some(t))
    };
    let mut partners: Vec<Vec<Nat>> = Vec::new();
    let mut checked: Vec<(Nat, Nat, Vec<Nat>, Vec<Nat>)> = Vec::new();
    let mut skipped = false;
    for (a, b) in samples {
        if !interp.sim.decide(a, b) {
            continue;
        }
        match (in_dom(a)?, in_dom(b)?) {
            (Some(ta), Some(tb)) => {
                partners.push(ta.clone());
                partners.push(tb.clone());
                checked.push((a.clone(), b.clone(), ta, tb));
            }
            _ => skipped = true,
        }
    }
    partners.sort();
    partners.dedup();
    partners.truncate(CONGRUENCE_PARTNERS);
    for (a, b, ta, tb) in &checked {
        for r in 0..interp.relation_count() {
            let arity = interp.relation_arity(r);
            for u in &partners {
                for pos in 0..arity {
                    let build = |t: &Vec<Nat>| -> Vec<Nat> {
                        (0..arity).flat_map(|m| if m == pos { t.clone() } else { u.clone() }).collect()
                    };
                    let x = decide_pair(&interp.rel_pos[r], &interp.rel_neg[r], oracle, &build(ta), budget)?;
                    let y = decide_pair(&interp.rel_pos[r], &interp.rel_neg[r], oracle, &build(tb), budget)?;
                    match (x, y) {
                        (Some(p), Some(q)) if p != q => return Ok(Verdict::Fail { witness: pair(a, b) }),
                        (None, _) | (_, None) => skipped = true,
                        _ => {}
                    }
                }
            }
        }
    }
    Ok(if skipped || checked.is_empty() { Verdict::Inconclusive } else { Verdict::Pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::DiagramOf;
    use crate::structures::{restrict, PureEquality};

    fn n(v: u64) -> Nat {
        nat(v)
    }

    #[test]
    fn formula_text_round_trip() {
        let s = "+Eq(x0,x1) & -R0(x0,y0) & +Is(y0,12)";
        let f: QFFormula = s.parse().unwrap();
        assert_eq!(f.to_string(), s);
        assert_eq!("true".parse::<QFFormula>().unwrap(), QFFormula::default());
        assert!("Eq(x0,x1)".parse::<QFFormula>().is_err());
        assert!("+Eq(x0)".parse::<QFFormula>().is_err());
    }

    #[test]
    fn eval_qf_examples() {
        let p = PureEquality::default();
        let d = restrict(&p, &[n(0), n(1)]);
        let refl: QFFormula = "+Eq(x0,x0)".parse().unwrap();
        assert!(eval_qf(&refl, &d, &[n(0)], &[]).unwrap());
        let ne: QFFormula = "-Eq(x0,x1)".parse().unwrap();
        assert!(eval_qf(&ne, &d, &[n(0), n(1)], &[]).unwrap());
        assert!(eval_qf(&ne, &d, &[n(0), n(7)], &[]).is_err());

        let d3 = restrict(&p, &[n(0), n(1), n(2)]);
        let meet: QFFormula = "+Eq(x1,x2)".parse().unwrap();
        assert!(eval_qf(&meet, &d3, &[n(0), n(1), n(1), n(2)], &[]).unwrap());
    }

    #[test]
    fn sigma1_examples() {
        let p = PureEquality::default();
        let d = restrict(&p, &[n(3)]);
        let fam = Sigma1Family::explicit("refl", 1, vec![qf(vec![eq(true, 0, 0)])]);
        assert_eq!(eval_sigma1_finite(&fam, &d, &[n(3)], &n(1)), Membership::Yes);
        let empty = Sigma1Family::empty("none", 1);
        assert_eq!(eval_sigma1_finite(&empty, &d, &[n(3)], &n(100)), Membership::Inconclusive);
        let pi = EffectiveInterpretation::pair_intersection();
        assert_eq!(eval_sigma1_finite(&pi.dom_neg, &d, &[n(3), n(3)], &n(1)), Membership::Yes);

        let o = DiagramOf(&p);
        assert_eq!(eval_sigma1_budget(&fam, &o, &[n(3)], 10), Membership::Yes);
        assert_eq!(eval_sigma1_budget(&empty, &o, &[n(3)], 10), Membership::Inconclusive);
        assert_eq!(eval_sigma1_budget(&pi.dom_neg, &o, &[n(3), n(3)], 10), Membership::Yes);
    }

    #[test]
    fn witnesses_are_searched() {
        // some y differs from x0
        let fam = Sigma1Family::explicit(
            "other",
            1,
            vec![Disjunct { witnesses: 1, formula: "-Eq(x0,y0)".parse().unwrap() }],
        );
        let p = PureEquality::default();
        assert_eq!(eval_sigma1_budget(&fam, &DiagramOf(&p), &[n(0)], 20), Membership::Yes);
    }

    #[test]
    fn equivalences_have_closed_form_reps() {
        let sims = [
            ComputableEquiv::CodeEquality,
            ComputableEquiv::UnorderedPair,
            ComputableEquiv::Coordinate { arity: 2, index: 1 },
            ComputableEquiv::Constant,
            ComputableEquiv::Table(vec![vec![n(4), n(9), n(2)]]),
        ];
        let b = Budget::new(u64::MAX);
        for sim in &sims {
            for x in 0..300u64 {
                let x = n(x);
                let rep = sim.least_code(&x, &b).unwrap();
                assert_eq!(rep, sim.least_code_search(&x), "{sim:?} at {x}");
                assert_eq!(sim.class_member(&rep, &n(0)), Some(rep.clone()));
                assert!(sim.class_members(&rep).take(5).all(|m| sim.decide(&m, &x)));
            }
        }
    }

    #[test]
    fn pair_intersection_quotient_on_three_points() {
        let pi = EffectiveInterpretation::pair_intersection();
        let p = PureEquality::default();
        // pairs over {0,1,2}
        let bound = enc_tuple(&[n(2), n(2)]).0.to_u64().unwrap() + 1;
        let restricted = restrict(&p, &[n(0), n(1), n(2)]);
        let q = build_quotient_fragment(&pi, &restricted, bound, 1000).unwrap();
        assert_eq!(q.reps.len(), 3);
        assert_eq!(q.diagram.positive_relation_count(), 6);
    }

    #[test]
    fn congruence_verdicts() {
        let p = PureEquality::default();
        let o = DiagramOf(&p);
        let pi = EffectiveInterpretation::pair_intersection();
        let s = vec![(enc_tuple(&[n(0), n(1)]).0, enc_tuple(&[n(1), n(0)]).0), (enc_tuple(&[n(1), n(2)]).0, enc_tuple(&[n(2), n(1)]).0)];
        assert_eq!(check_congruence(&pi, &o, &s, 1000).unwrap(), Verdict::Pass);

        let broken = EffectiveInterpretation::broken_sim();
        let s = vec![
            (enc_tuple(&[n(0), n(1)]).0, enc_tuple(&[n(2), n(3)]).0),
            (enc_tuple(&[n(0), n(1)]).0, enc_tuple(&[n(1), n(0)]).0),
            (enc_tuple(&[n(1), n(2)]).0, enc_tuple(&[n(0), n(1)]).0),
        ];
        assert!(matches!(check_congruence(&broken, &o, &s, 1000).unwrap(), Verdict::Fail { .. }));

        let id = EffectiveInterpretation::identity(Signature::empty());
        let s = vec![(n(1), n(1)), (n(2), n(2))];
        assert_eq!(check_congruence(&id, &o, &s, 100).unwrap(), Verdict::Pass);
    }

    #[test]
    fn dovetail_reaches_every_stream() {
        let outer = (0u64..).map(|i| Box::new((0u64..).map(move |j| (i, j))) as Box<dyn Iterator<Item = (u64, u64)>>);
        let got: Vec<(u64, u64)> = Dovetail::new(Box::new(outer)).take(200).collect();
        assert!(got.contains(&(5, 3)));
        assert!(got.contains(&(0, 10)));
    }
}
