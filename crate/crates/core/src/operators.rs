//! Enumeration operators and budgeted oracle programs.
//!
//! An [`EnumerationOperator`] is an indexed stream of axioms `(α, b)`. Every
//! operator can list, for a target fact, the axioms that output it
//! ([`EnumerationOperator::producers`]); searches walk that list instead of
//! the whole stream. Budgets count work (axioms examined, instructions,
//! oracle queries), never raw stream indices, so nested constructions stay
//! within desk-scale limits even when their codes are astronomically large.
//!
//! An [`OracleProgram`] is a list of instructions over natural-number
//! registers. Beyond queries and `pair`/`unpair` arithmetic, the
//! instruction set can call another program against a derived oracle
//! ([`View`]) and ask for the first enumeration stage of a fact. A separate
//! instruction returns the least representative of an equivalence class. All of these are data, so
//! transforms can emit programs as artifacts.

use std::cell::{Cell, RefCell};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, ToPrimitive, Zero};

use crate::coding::{decode_fact, nat, pair, unpair, Fact, FactCode, Nat};
use crate::error::{Error, Result};
use crate::interpretations::{ComputableEquiv, EffectiveInterpretation};
use crate::structures::{diagram_bit, FiniteDiagram, Perm, Presentation};

/// Steps per `oracle_run` call unless configured otherwise.
pub const DEFAULT_STEP_BUDGET: u64 = 10_000;
/// Axioms per enumeration pass unless configured otherwise.
pub const DEFAULT_AXIOM_BUDGET: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OutOfBudget;

impl fmt::Display for OutOfBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("out of budget")
    }
}

/// A shared work counter. Nested runs draw from the same counter.
#[derive(Debug)]
pub struct Budget {
    left: Cell<u64>,
    spent: Cell<u64>,
}

impl Budget {
    pub fn new(steps: u64) -> Self {
        Budget { left: Cell::new(steps), spent: Cell::new(0) }
    }

    pub fn spend(&self, n: u64) -> Result<(), OutOfBudget> {
        let left = self.left.get();
        if left < n {
            self.spent.set(self.spent.get() + left);
            self.left.set(0);
            return Err(OutOfBudget);
        }
        self.left.set(left - n);
        self.spent.set(self.spent.get() + n);
        Ok(())
    }

    pub fn remaining(&self) -> u64 {
        self.left.get()
    }

    pub fn spent(&self) -> u64 {
        self.spent.get()
    }
}

/// A total oracle `ω -> {0, 1}`. Plain lookups are free; derived oracles
/// charge the work they do to the budget.
pub trait Oracle {
    fn query(&self, code: &Nat, budget: &Budget) -> Result<bool, OutOfBudget>;

    /// Least `y` with `pair(x, y)` in the set. Oracles that know the
    /// function they encode answer directly; the rest search.
    fn lookup(&self, x: &Nat, budget: &Budget) -> Result<Nat, OutOfBudget> {
        let mut y = Nat::zero();
        loop {
            budget.spend(1)?;
            if self.query(&pair(x, &y), budget)? {
                return Ok(y);
            }
            y += 1u32;
        }
    }

    /// A component, when this oracle is a join.
    fn part(&self, _part: JoinPart) -> Option<&dyn Oracle> {
        None
    }
}

impl<T: Oracle + ?Sized> Oracle for &T {
    fn query(&self, code: &Nat, budget: &Budget) -> Result<bool, OutOfBudget> {
        (**self).query(code, budget)
    }
    fn lookup(&self, x: &Nat, budget: &Budget) -> Result<Nat, OutOfBudget> {
        (**self).lookup(x, budget)
    }
    fn part(&self, part: JoinPart) -> Option<&dyn Oracle> {
        (**self).part(part)
    }
}

impl<T: Oracle + ?Sized> Oracle for Box<T> {
    fn query(&self, code: &Nat, budget: &Budget) -> Result<bool, OutOfBudget> {
        (**self).query(code, budget)
    }
    fn lookup(&self, x: &Nat, budget: &Budget) -> Result<Nat, OutOfBudget> {
        (**self).lookup(x, budget)
    }
    fn part(&self, part: JoinPart) -> Option<&dyn Oracle> {
        (**self).part(part)
    }
}

/// The atomic diagram of a presentation.
pub struct DiagramOf<'a>(pub &'a dyn Presentation);

impl Oracle for DiagramOf<'_> {
    fn query(&self, code: &Nat, _budget: &Budget) -> Result<bool, OutOfBudget> {
                Ok(diagram_bit(self.0, code))
    }
}

impl Oracle for FiniteDiagram {
    fn query(&self, code: &Nat, _budget: &Budget) -> Result<bool, OutOfBudget> {
                Ok(self.contains_code(code))
    }
}

impl Oracle for BTreeSet<Nat> {
    fn query(&self, code: &Nat, _budget: &Budget) -> Result<bool, OutOfBudget> {
                Ok(self.contains(code))
    }
}

/// Oracle given by a host predicate.
pub struct FnOracle<F: Fn(&Nat) -> bool>(pub F);

impl<F: Fn(&Nat) -> bool> Oracle for FnOracle<F> {
    fn query(&self, code: &Nat, _budget: &Budget) -> Result<bool, OutOfBudget> {
                Ok((self.0)(code))
    }
}

/// The graph of a permutation, as a set of pair codes.
pub struct PermGraph<'a>(pub &'a Perm);

impl Oracle for PermGraph<'_> {
    fn query(&self, code: &Nat, _budget: &Budget) -> Result<bool, OutOfBudget> {
                let (x, y) = unpair(code);
        Ok(self.0.apply(&x) == y)
    }

    fn lookup(&self, x: &Nat, budget: &Budget) -> Result<Nat, OutOfBudget> {
        budget.spend(1)?;
        Ok(self.0.apply(x))
    }
}

/// `left ⊕ map ⊕ right`.
pub struct JoinOracle<'a> {
    pub left: &'a dyn Oracle,
    pub map: &'a dyn Oracle,
    pub right: &'a dyn Oracle,
}

impl Oracle for JoinOracle<'_> {
    fn query(&self, code: &Nat, budget: &Budget) -> Result<bool, OutOfBudget> {
        let three = Nat::from(3u32);
        let n = code / &three;
        match (code % &three).to_u32() {
            Some(0) => self.left.query(&n, budget),
            Some(1) => self.map.query(&n, budget),
            _ => self.right.query(&n, budget),
        }
    }

    fn part(&self, part: JoinPart) -> Option<&dyn Oracle> {
        Some(match part {
            JoinPart::Left => self.left,
            JoinPart::Map => self.map,
            JoinPart::Right => self.right,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JoinPart {
    Left,
    Map,
    Right,
}

impl JoinPart {
    fn offset(self) -> u32 {
        match self {
            JoinPart::Left => 0,
            JoinPart::Map => 1,
            JoinPart::Right => 2,
        }
    }
}

/// One component of a join oracle.
pub struct PartOf<'a> {
    pub part: JoinPart,
    pub inner: &'a dyn Oracle,
}

impl Oracle for PartOf<'_> {
    fn query(&self, code: &Nat, budget: &Budget) -> Result<bool, OutOfBudget> {
        let c = code * 3u32 + self.part.offset();
        self.inner.query(&c, budget)
    }

    fn lookup(&self, x: &Nat, budget: &Budget) -> Result<Nat, OutOfBudget> {
        match self.inner.part(self.part) {
            Some(o) => o.lookup(x, budget),
            None => {
                let mut y = Nat::zero();
                loop {
                    budget.spend(1)?;
                    if self.query(&pair(x, &y), budget)? {
                        return Ok(y);
                    }
                    y += 1u32;
                }
            }
        }
    }
}

/// Records every code asked of the wrapped oracle.
pub struct Recording<'a> {
    pub inner: &'a dyn Oracle,
    pub used: RefCell<BTreeSet<Nat>>,
}

impl<'a> Recording<'a> {
    pub fn new(inner: &'a dyn Oracle) -> Self {
        Recording { inner, used: RefCell::new(BTreeSet::new()) }
    }

    pub fn into_use(self) -> BTreeSet<Nat> {
        self.used.into_inner()
    }
}

impl Oracle for Recording<'_> {
    fn query(&self, code: &Nat, budget: &Budget) -> Result<bool, OutOfBudget> {
        self.used.borrow_mut().insert(code.clone());
        self.inner.query(code, budget)
    }
}

// ---------------------------------------------------------------------------
// Enumeration operators

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Axiom {
    /// Fact codes that must all be in the oracle.
    pub alpha: Vec<Nat>,
    pub output: Nat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexedAxiom {
    pub index: Nat,
    pub axiom: Axiom,
}

impl IndexedAxiom {
    /// First stage `s` with the axiom among the first `s` and every
    /// α-code below `s`.
    pub fn stage(&self) -> Nat {
        let mut s = self.index.clone();
        for c in &self.axiom.alpha {
            if *c > s {
                s = c.clone();
            }
        }
        s + 1u32
    }
}

/// Axioms outputting one target, as produced by [`EnumerationOperator::producers`].
pub struct Producers {
    /// Whether the axioms come in increasing index order.
    pub ordered: bool,
    pub iter: Box<dyn Iterator<Item = IndexedAxiom>>,
}

impl Producers {
    pub fn none() -> Self {
        Producers { ordered: true, iter: Box::new(std::iter::empty()) }
    }

    pub fn single(a: IndexedAxiom) -> Self {
        Producers { ordered: true, iter: Box::new(std::iter::once(a)) }
    }
}

#[derive(Clone, Debug)]
pub enum OperatorBody {
    /// Axiom `k` is the `k`-th listed one; the stream ends after the list.
    Explicit(Vec<Axiom>),
    /// Axiom `c` is `({c}, c)` for every well-formed fact code `c`.
    Identity,
    /// Like `Identity`, except that facts of relation `rel` on pairwise
    /// distinct arguments are produced from their negation.
    Complement { rel: u64 },
    /// The operator read off an effective interpretation.
    Synthesized(Arc<EffectiveInterpretation>),
}

#[derive(Clone, Debug)]
pub struct EnumerationOperator {
    pub name: String,
    pub body: OperatorBody,
}

fn distinct(args: &[Nat]) -> bool {
    let set: BTreeSet<&Nat> = args.iter().collect();
    set.len() == args.len()
}

impl EnumerationOperator {
    pub fn explicit(name: &str, axioms: Vec<Axiom>) -> Self {
        EnumerationOperator { name: name.into(), body: OperatorBody::Explicit(axioms) }
    }

    pub fn identity() -> Self {
        EnumerationOperator { name: "identity".into(), body: OperatorBody::Identity }
    }

    pub fn complement(rel: u64) -> Self {
        EnumerationOperator { name: "complement".into(), body: OperatorBody::Complement { rel } }
    }

    /// The empty operator.
    pub fn empty() -> Self {
        EnumerationOperator::explicit("empty", Vec::new())
    }

    /// The axiom enumerated at `index`, if any.
    pub fn axiom(&self, index: &Nat) -> Option<Axiom> {
        match &self.body {
            OperatorBody::Explicit(list) => list.get(index.to_usize()?).cloned(),
            OperatorBody::Identity => {
                decode_fact(&FactCode(index.clone())).ok()?;
                Some(Axiom { alpha: vec![index.clone()], output: index.clone() })
            }
            OperatorBody::Complement { rel } => {
                let fact = decode_fact(&FactCode(index.clone())).ok()?;
                Some(Axiom { alpha: vec![complement_source(&fact, *rel)], output: index.clone() })
            }
            OperatorBody::Synthesized(interp) => interp.synthesized_axiom(index),
        }
    }

    /// Axioms whose output is `target`.
    pub fn producers(&self, target: &Fact) -> Producers {
        let code = target.code().0;
        match &self.body {
            OperatorBody::Explicit(list) => {
                let hits: Vec<IndexedAxiom> = list
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.output == code)
                    .map(|(i, a)| IndexedAxiom { index: nat(i as u64), axiom: a.clone() })
                    .collect();
                Producers { ordered: true, iter: Box::new(hits.into_iter()) }
            }
            OperatorBody::Identity => Producers::single(IndexedAxiom {
                index: code.clone(),
                axiom: Axiom { alpha: vec![code.clone()], output: code },
            }),
            OperatorBody::Complement { rel } => Producers::single(IndexedAxiom {
                index: code.clone(),
                axiom: Axiom { alpha: vec![complement_source(target, *rel)], output: code },
            }),
            OperatorBody::Synthesized(interp) => EffectiveInterpretation::synthesized_producers(interp, target),
        }
    }

    /// Whether `producers` is backed by a closed form rather than a scan.
    pub fn is_schema(&self) -> bool {
        !matches!(self.body, OperatorBody::Explicit(_))
    }
}

fn complement_source(fact: &Fact, rel: u64) -> Nat {
    if fact.rel == Some(rel) && distinct(&fact.args) {
        fact.negation().code().0
    } else {
        fact.code().0
    }
}

/// `{ b : (α, b) among the first `stage` axioms, α ⊆ oracle }`.
pub fn enum_apply_stage(psi: &EnumerationOperator, oracle: &BTreeSet<Nat>, stage: u64) -> BTreeSet<Nat> {
    let mut out = BTreeSet::new();
    for k in 0..stage {
        if let Some(ax) = psi.axiom(&nat(k)) {
            if ax.alpha.iter().all(|c| oracle.contains(c)) {
                out.insert(ax.output);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Yes,
    Inconclusive,
}

/// Outcome of searching the producers of one target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(IndexedAxiom),
    /// No producer can ever fire.
    Exhausted,
    OutOfBudget,
}

/// Walks the producers of a target one axiom at a time.
pub struct Searcher {
    producers: Producers,
    best: Option<IndexedAxiom>,
    exact_stage: bool,
    done: bool,
}

impl Searcher {
    /// With `exact_stage`, an ordered search keeps going until no later
    /// axiom can fire at an earlier stage.
    pub fn new(op: &EnumerationOperator, target: &Fact, exact_stage: bool) -> Self {
        Searcher { producers: op.producers(target), best: None, exact_stage, done: false }
    }

    /// Examines one more axiom. `Some` once the search has concluded.
    pub fn step(&mut self, oracle: &dyn Oracle, budget: &Budget) -> Result<Option<SearchOutcome>, OutOfBudget> {
        if self.done {
            return Ok(Some(self.conclude()));
        }
        let Some(ax) = self.producers.iter.next() else {
            self.done = true;
            return Ok(Some(self.conclude()));
        };
        budget.spend(1)?;
        if let Some(best) = &self.best {
            // ordered: every remaining axiom has index >= ax.index
            if ax.index.clone() + 1u32 >= best.stage() {
                self.done = true;
                return Ok(Some(self.conclude()));
            }
        }
        let mut fires = true;
        for c in &ax.axiom.alpha {
            if !oracle.query(c, budget)? {
                fires = false;
                break;
            }
        }
        if fires {
            let better = match &self.best {
                None => true,
                Some(b) => ax.stage() < b.stage(),
            };
            if better {
                self.best = Some(ax);
            }
            if !(self.exact_stage && self.producers.ordered) {
                self.done = true;
                return Ok(Some(self.conclude()));
            }
        }
        Ok(None)
    }

    fn conclude(&self) -> SearchOutcome {
        match &self.best {
            Some(b) => SearchOutcome::Found(b.clone()),
            None => SearchOutcome::Exhausted,
        }
    }

    pub fn run(mut self, oracle: &dyn Oracle, budget: &Budget) -> SearchOutcome {
        loop {
            match self.step(oracle, budget) {
                Ok(Some(out)) => return out,
                Ok(None) => {}
                Err(OutOfBudget) => return SearchOutcome::OutOfBudget,
            }
        }
    }
}

/// Semi-decides `target ∈ Ψ^oracle`, examining at most `budget` units of
/// work. Never answers no.
pub fn enum_member(psi: &EnumerationOperator, oracle: &dyn Oracle, target: &FactCode, budget: u64) -> Membership {
    let Ok(fact) = decode_fact(target) else {
        return Membership::Inconclusive;
    };
    let b = Budget::new(budget);
    match Searcher::new(psi, &fact, false).run(oracle, &b) {
        SearchOutcome::Found(_) => Membership::Yes,
        _ => Membership::Inconclusive,
    }
}

/// Least stage at which `target` is enumerated from `oracle`; `None` when no
/// producer can fire.
pub fn stage_of(
    psi: &EnumerationOperator,
    oracle: &dyn Oracle,
    target: &Fact,
    budget: &Budget,
) -> Result<Option<Nat>, OutOfBudget> {
    match Searcher::new(psi, target, true).run(oracle, budget) {
        SearchOutcome::Found(ax) => Ok(Some(ax.stage())),
        SearchOutcome::Exhausted => Ok(None),
        SearchOutcome::OutOfBudget => Err(OutOfBudget),
    }
}

/// Three-valued truth of one fact in `Ψ^oracle`, searching the fact and its
/// negation side by side.
pub fn image_truth(
    psi: &EnumerationOperator,
    oracle: &dyn Oracle,
    fact: &Fact,
    budget: &Budget,
) -> Result<Option<bool>, OutOfBudget> {
    let mut pos = Searcher::new(psi, fact, false);
    let mut neg = Searcher::new(psi, &fact.negation(), false);
    let (mut pos_done, mut neg_done) = (false, false);
    loop {
        if !pos_done {
            match pos.step(oracle, budget)? {
                Some(SearchOutcome::Found(_)) => return Ok(Some(true)),
                Some(_) => pos_done = true,
                None => {}
            }
        }
        if !neg_done {
            match neg.step(oracle, budget)? {
                Some(SearchOutcome::Found(_)) => return Ok(Some(false)),
                Some(_) => neg_done = true,
                None => {}
            }
        }
        if pos_done && neg_done {
            // neither sign is ever enumerated: the fact is outside the image
            return Ok(None);
        }
    }
}

/// The diagram `Ψ^inner`, queried code by code. Facts that are never
/// enumerated with either sign read as absent.
pub struct ImageOracle<'a> {
    pub op: &'a EnumerationOperator,
    pub inner: &'a dyn Oracle,
}

impl Oracle for ImageOracle<'_> {
    fn query(&self, code: &Nat, budget: &Budget) -> Result<bool, OutOfBudget> {
                let Ok(fact) = decode_fact(&FactCode(code.clone())) else {
            return Ok(false);
        };
        Ok(image_truth(self.op, self.inner, &fact, budget)? == Some(true))
    }
}

// ---------------------------------------------------------------------------
// Oracle programs

pub type Reg = usize;

/// A derived oracle, evaluated relative to the oracle a program runs on.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum View {
    Base,
    Part(JoinPart, Box<View>),
    /// `Ψ^view` for the operator at this library index.
    Image(usize, Box<View>),
    /// The set decided by the program at this library index.
    Decide(usize, Box<View>),
    /// The graph of the function computed by the program at this index.
    Graph(usize, Box<View>),
    Join(Box<View>, Box<View>, Box<View>),
}

impl View {
    pub fn left() -> View {
        View::Part(JoinPart::Left, Box::new(View::Base))
    }
    pub fn map() -> View {
        View::Part(JoinPart::Map, Box::new(View::Base))
    }
    pub fn right() -> View {
        View::Part(JoinPart::Right, Box::new(View::Base))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Instr {
    Set(Reg, Nat),
    Mov(Reg, Reg),
    Add(Reg, Reg, Reg),
    /// Truncated subtraction.
    Sub(Reg, Reg, Reg),
    Pair(Reg, Reg, Reg),
    /// `Unpair(a, b, src)`: `(a, b) = unpair(src)`.
    Unpair(Reg, Reg, Reg),
    /// `Query(dst, code, view)`: 1 if `code` is in the view, else 0.
    Query(Reg, Reg, View),
    /// `Lookup(dst, x, view)`: least `y` with `pair(x, y)` in the view.
    Lookup(Reg, Reg, View),
    Jmp(usize),
    Jz(Reg, usize),
    Jeq(Reg, Reg, usize),
    Jlt(Reg, Reg, usize),
    /// `Call(dst, prog, input, view)`.
    Call(Reg, usize, Reg, View),
    /// `Stage(dst, op, fact, view)`: 1 + least stage of the fact code, or 0
    /// when it is never enumerated.
    Stage(Reg, usize, Reg, View),
    /// `Rep(dst, sim, tuple)`: least tuple code equivalent to `tuple`.
    Rep(Reg, usize, Reg),
    Halt(Reg),
}

/// An interpreted program together with the artifacts it refers to.
#[derive(Clone, Debug)]
pub struct OracleProgram {
    pub name: String,
    pub registers: usize,
    pub code: Vec<Instr>,
    pub ops: Vec<Arc<EnumerationOperator>>,
    pub progs: Vec<Arc<OracleProgram>>,
    pub sims: Vec<ComputableEquiv>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Halted { output: Nat, used: BTreeSet<Nat>, steps: u64 },
    OutOfBudget { used: BTreeSet<Nat> },
}

impl RunOutcome {
    pub fn output(&self) -> Option<&Nat> {
        match self {
            RunOutcome::Halted { output, .. } => Some(output),
            RunOutcome::OutOfBudget { .. } => None,
        }
    }

    pub fn used(&self) -> &BTreeSet<Nat> {
        match self {
            RunOutcome::Halted { used, .. } | RunOutcome::OutOfBudget { used } => used,
        }
    }
}

impl OracleProgram {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(format!("program {}: {msg}", self.name)));
        if self.registers == 0 {
            return bad("needs at least one register".into());
        }
        let n = self.code.len();
        for (pc, ins) in self.code.iter().enumerate() {
            let regs: Vec<Reg> = match ins {
                Instr::Set(a, _) | Instr::Halt(a) => vec![*a],
                Instr::Mov(a, b) => vec![*a, *b],
                Instr::Add(a, b, c) | Instr::Sub(a, b, c) | Instr::Pair(a, b, c) | Instr::Unpair(a, b, c) => {
                    vec![*a, *b, *c]
                }
                Instr::Query(a, b, _) | Instr::Lookup(a, b, _) | Instr::Rep(a, _, b) => vec![*a, *b],
                Instr::Jmp(_) => vec![],
                Instr::Jz(a, _) => vec![*a],
                Instr::Jeq(a, b, _) | Instr::Jlt(a, b, _) => vec![*a, *b],
                Instr::Call(a, _, b, _) | Instr::Stage(a, _, b, _) => vec![*a, *b],
            };
            if let Some(r) = regs.iter().find(|&&r| r >= self.registers) {
                return bad(format!("instruction {pc} uses register r{r}"));
            }
            let target = match ins {
                Instr::Jmp(t) | Instr::Jz(_, t) | Instr::Jeq(_, _, t) | Instr::Jlt(_, _, t) => Some(*t),
                _ => None,
            };
            if let Some(t) = target {
                if t >= n {
                    return bad(format!("instruction {pc} jumps to {t}"));
                }
            }
            let mut views = Vec::new();
            match ins {
                Instr::Query(_, _, v) | Instr::Lookup(_, _, v) => views.push(v),
                Instr::Call(_, p, _, v) => {
                    if *p >= self.progs.len() {
                        return bad(format!("instruction {pc} calls missing program {p}"));
                    }
                    views.push(v)
                }
                Instr::Stage(_, o, _, v) => {
                    if *o >= self.ops.len() {
                        return bad(format!("instruction {pc} names missing operator {o}"));
                    }
                    views.push(v)
                }
                Instr::Rep(_, s, _) if *s >= self.sims.len() => {
                    return bad(format!("instruction {pc} names missing equivalence {s}"));
                }
                _ => {}
            }
            for v in views {
                self.validate_view(v)?;
            }
        }
        for p in &self.progs {
            p.validate()?;
        }
        Ok(())
    }

    fn validate_view(&self, v: &View) -> Result<()> {
        match v {
            View::Base => Ok(()),
            View::Part(_, inner) => self.validate_view(inner),
            View::Image(o, inner) if *o < self.ops.len() => self.validate_view(inner),
            View::Decide(p, inner) | View::Graph(p, inner) if *p < self.progs.len() => {
                self.validate_view(inner)
            }
            View::Join(a, b, c) => {
                self.validate_view(a)?;
                self.validate_view(b)?;
                self.validate_view(c)
            }
            _ => Err(Error::InvalidInput(format!("program {}: view refers to a missing artifact", self.name))),
        }
    }

    /// Runs on `input` with a fresh budget, recording the use.
    pub fn run(&self, oracle: &dyn Oracle, input: &Nat, steps: u64) -> RunOutcome {
        let rec = Recording::new(oracle);
        let budget = Budget::new(steps);
        let res = self.exec(&rec, input, &budget);
        let used = rec.into_use();
        match res {
            Ok(output) => RunOutcome::Halted { output, used, steps: budget.spent() },
            Err(OutOfBudget) => RunOutcome::OutOfBudget { used },
        }
    }

    /// Runs against a shared budget without recording.
    pub fn exec(&self, oracle: &dyn Oracle, input: &Nat, budget: &Budget) -> Result<Nat, OutOfBudget> {
        let mut regs = vec![Nat::zero(); self.registers];
        regs[0] = input.clone();
        let mut pc = 0usize;
        loop {
            budget.spend(1)?;
            // falling off the end loops forever
            let Some(ins) = self.code.get(pc) else {
                let _ = budget.spend(u64::MAX);
                return Err(OutOfBudget);
            };
            pc += 1;
            match ins {
                Instr::Set(a, v) => regs[*a] = v.clone(),
                Instr::Mov(a, b) => regs[*a] = regs[*b].clone(),
                Instr::Add(a, b, c) => regs[*a] = &regs[*b] + &regs[*c],
                Instr::Sub(a, b, c) => {
                    regs[*a] = if regs[*b] > regs[*c] { &regs[*b] - &regs[*c] } else { Nat::zero() }
                }
                Instr::Pair(a, b, c) => regs[*a] = pair(&regs[*b], &regs[*c]),
                Instr::Unpair(a, b, c) => {
                    let (x, y) = unpair(&regs[*c]);
                    regs[*a] = x;
                    regs[*b] = y;
                }
                Instr::Lookup(a, b, view) => {
                    regs[*a] = self.with_view(view, oracle, &mut |o| o.lookup(&regs[*b], budget))?;
                }
                Instr::Query(a, b, view) => {
                    let bit = self.with_view(view, oracle, &mut |o| o.query(&regs[*b], budget))?;
                    regs[*a] = if bit { Nat::one() } else { Nat::zero() };
                }
                Instr::Jmp(t) => pc = *t,
                Instr::Jz(a, t) => {
                    if regs[*a].is_zero() {
                        pc = *t
                    }
                }
                Instr::Jeq(a, b, t) => {
                    if regs[*a] == regs[*b] {
                        pc = *t
                    }
                }
                Instr::Jlt(a, b, t) => {
                    if regs[*a] < regs[*b] {
                        pc = *t
                    }
                }
                Instr::Call(a, p, b, view) => {
                    let prog = self.progs[*p].clone();
                    let input = regs[*b].clone();
                    regs[*a] = self.with_view(view, oracle, &mut |o| prog.exec(o, &input, budget))?;
                }
                Instr::Stage(a, o, b, view) => {
                    let op = self.ops[*o].clone();
                    let out = match decode_fact(&FactCode(regs[*b].clone())) {
                        Err(_) => None,
                        Ok(fact) => self.with_view(view, oracle, &mut |or| stage_of(&op, or, &fact, budget))?,
                    };
                    regs[*a] = match out {
                        Some(s) => s + 1u32,
                        None => Nat::zero(),
                    };
                }
                Instr::Rep(a, s, b) => {
                    regs[*a] = self.sims[*s].least_code(&regs[*b], budget)?;
                }
                Instr::Halt(a) => return Ok(regs[*a].clone()),
            }
        }
    }

    /// Evaluates `view` over `base` and hands the resulting oracle to `f`.
    fn with_view<T>(
        &self,
        view: &View,
        base: &dyn Oracle,
        f: &mut dyn FnMut(&dyn Oracle) -> Result<T, OutOfBudget>,
    ) -> Result<T, OutOfBudget> {
        match view {
            View::Base => f(base),
            View::Part(part, inner) => {
                self.with_view(inner, base, &mut |o| f(&PartOf { part: *part, inner: o }))
            }
            View::Image(op, inner) => {
                let op = &self.ops[*op];
                self.with_view(inner, base, &mut |o| f(&ImageOracle { op, inner: o }))
            }
            View::Decide(p, inner) => {
                let prog = &self.progs[*p];
                self.with_view(inner, base, &mut |o| f(&DecidedBy { prog, inner: o }))
            }
            View::Graph(p, inner) => {
                let prog = &self.progs[*p];
                self.with_view(inner, base, &mut |o| f(&GraphOf::new(prog, o)))
            }
            View::Join(a, b, c) => self.with_view(a, base, &mut |oa| {
                self.with_view(b, base, &mut |ob| {
                    self.with_view(c, base, &mut |oc| f(&JoinOracle { left: oa, map: ob, right: oc }))
                })
            }),
        }
    }
}

/// The set `{ x : prog^inner(x) != 0 }`.
pub struct DecidedBy<'a> {
    pub prog: &'a OracleProgram,
    pub inner: &'a dyn Oracle,
}

impl Oracle for DecidedBy<'_> {
    fn query(&self, code: &Nat, budget: &Budget) -> Result<bool, OutOfBudget> {
        Ok(!self.prog.exec(self.inner, code, budget)?.is_zero())
    }
}

/// The graph `{ pair(x, y) : prog^inner(x) = y }`, memoising values.
pub struct GraphOf<'a> {
    pub prog: &'a OracleProgram,
    pub inner: &'a dyn Oracle,
    memo: RefCell<HashMap<Nat, Nat>>,
}

impl<'a> GraphOf<'a> {
    pub fn new(prog: &'a OracleProgram, inner: &'a dyn Oracle) -> Self {
        GraphOf { prog, inner, memo: RefCell::new(HashMap::new()) }
    }
}

impl Oracle for GraphOf<'_> {
    fn query(&self, code: &Nat, budget: &Budget) -> Result<bool, OutOfBudget> {
        let (x, y) = unpair(code);
        if let Some(v) = self.memo.borrow().get(&x) {
            return Ok(*v == y);
        }
        let v = self.prog.exec(self.inner, &x, budget)?;
        let hit = v == y;
        self.memo.borrow_mut().insert(x, v);
        Ok(hit)
    }

    fn lookup(&self, x: &Nat, budget: &Budget) -> Result<Nat, OutOfBudget> {
        if let Some(v) = self.memo.borrow().get(x) {
            return Ok(v.clone());
        }
        let v = self.prog.exec(self.inner, x, budget)?;
        self.memo.borrow_mut().insert(x.clone(), v.clone());
        Ok(v)
    }
}

/// `oracle_run` from the operator interface.
pub fn oracle_run(prog: &OracleProgram, oracle: &dyn Oracle, input: &Nat, budget: u64) -> RunOutcome {
    prog.run(oracle, input, budget)
}

/// Program assembler with symbolic labels.
#[derive(Default)]
pub struct Asm {
    name: String,
    registers: usize,
    code: Vec<Instr>,
    labels: HashMap<String, usize>,
    fixups: Vec<(usize, String)>,
    ops: Vec<Arc<EnumerationOperator>>,
    progs: Vec<Arc<OracleProgram>>,
    sims: Vec<ComputableEquiv>,
}

impl Asm {
    pub fn new(name: &str, registers: usize) -> Self {
        Asm { name: name.into(), registers, ..Default::default() }
    }

    pub fn op(&mut self, op: Arc<EnumerationOperator>) -> usize {
        self.ops.push(op);
        self.ops.len() - 1
    }

    pub fn prog(&mut self, p: Arc<OracleProgram>) -> usize {
        self.progs.push(p);
        self.progs.len() - 1
    }

    pub fn sim(&mut self, s: ComputableEquiv) -> usize {
        self.sims.push(s);
        self.sims.len() - 1
    }

    pub fn label(&mut self, name: &str) {
        self.labels.insert(name.to_string(), self.code.len());
    }

    pub fn emit(&mut self, ins: Instr) {
        self.code.push(ins);
    }

    pub fn set(&mut self, r: Reg, v: u64) {
        self.emit(Instr::Set(r, nat(v)));
    }

    fn jump(&mut self, ins: Instr, label: &str) {
        self.fixups.push((self.code.len(), label.to_string()));
        self.code.push(ins);
    }

    pub fn jmp(&mut self, label: &str) {
        self.jump(Instr::Jmp(0), label);
    }
    pub fn jz(&mut self, r: Reg, label: &str) {
        self.jump(Instr::Jz(r, 0), label);
    }
    pub fn jeq(&mut self, a: Reg, b: Reg, label: &str) {
        self.jump(Instr::Jeq(a, b, 0), label);
    }
    pub fn jlt(&mut self, a: Reg, b: Reg, label: &str) {
        self.jump(Instr::Jlt(a, b, 0), label);
    }

    pub fn finish(mut self) -> OracleProgram {
        for (pc, label) in std::mem::take(&mut self.fixups) {
            let t = *self.labels.get(&label).unwrap_or_else(|| panic!("undefined label {label}"));
            match &mut self.code[pc] {
                Instr::Jmp(x) | Instr::Jz(_, x) | Instr::Jeq(_, _, x) | Instr::Jlt(_, _, x) => *x = t,
                _ => unreachable!("fixup on a non-jump"),
            }
        }
        let p = OracleProgram {
            name: self.name,
            registers: self.registers,
            code: self.code,
            ops: self.ops,
            progs: self.progs,
            sims: self.sims,
        };
        debug_assert!(p.validate().is_ok(), "{:?}", p.validate());
        p
    }
}

/// An oracle program read as a map between presentations.
#[derive(Clone, Debug)]
pub struct IsoProgram(pub Arc<OracleProgram>);

impl IsoProgram {
    pub fn apply(&self, oracle: &dyn Oracle, x: &Nat, budget: &Budget) -> Result<Nat, OutOfBudget> {
        self.0.exec(oracle, x, budget)
    }
}

/// `g ∘ f`, both run against the same oracle.
pub fn compose_iso_programs(f: &IsoProgram, g: &IsoProgram) -> IsoProgram {
    let mut a = Asm::new(&format!("{}∘{}", g.0.name, f.0.name), 2);
    let pf = a.prog(f.0.clone());
    let pg = a.prog(g.0.clone());
    a.emit(Instr::Call(1, pf, 0, View::Base));
    a.emit(Instr::Call(1, pg, 1, View::Base));
    a.emit(Instr::Halt(1));
    IsoProgram(Arc::new(a.finish()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{encode_fact, FactKind};
    use crate::structures::{restrict, Graph, GraphRule, PureEquality};

    fn n(v: u64) -> Nat {
        nat(v)
    }

    fn identity_prog() -> OracleProgram {
        let mut a = Asm::new("id", 1);
        a.emit(Instr::Halt(0));
        a.finish()
    }

    #[test]
    fn identity_operator_stage_application() {
        let id = EnumerationOperator::identity();
        let oracle: BTreeSet<Nat> = [n(0), n(2)].into_iter().collect();
        assert_eq!(enum_apply_stage(&id, &oracle, 3), oracle);
        assert_eq!(enum_apply_stage(&id, &oracle, 2), [n(0)].into_iter().collect());
    }

    #[test]
    fn empty_oracle_fires_nothing() {
        let ops = [EnumerationOperator::identity(), EnumerationOperator::complement(0)];
        for op in &ops {
            assert!(enum_apply_stage(op, &BTreeSet::new(), 500).is_empty());
        }
    }

    #[test]
    fn complement_flips_edges() {
        let op = EnumerationOperator::complement(0);
        let neg = Fact::rel(false, 0, vec![n(0), n(1)]);
        let pos = Fact::rel(true, 0, vec![n(0), n(1)]);
        let oracle: BTreeSet<Nat> = [neg.code().0].into_iter().collect();
        let stage = pos.code().0.to_u64().unwrap() + 1;
        let out = enum_apply_stage(&op, &oracle, stage.max(neg.code().0.to_u64().unwrap() + 1));
        assert!(out.contains(&pos.code().0));
    }

    #[test]
    fn membership_examples() {
        let id = EnumerationOperator::identity();
        let p = PureEquality::default();
        let o = DiagramOf(&p);
        let target = encode_fact(FactKind::PosEq, None, &[n(0), n(0)]).unwrap();
        assert_eq!(enum_member(&id, &o, &target, 1), Membership::Yes);
        assert_eq!(enum_member(&EnumerationOperator::empty(), &o, &target, 1000), Membership::Inconclusive);
        for b in 1..20 {
            assert_eq!(enum_member(&id, &o, &target, b), Membership::Yes);
        }
        assert_eq!(enum_member(&id, &o, &target, 0), Membership::Inconclusive);
    }

    #[test]
    fn identity_stage_is_code_plus_one() {
        let id = EnumerationOperator::identity();
        let p = PureEquality::default();
        let b = Budget::new(100);
        for x in 0..10 {
            let f = Fact::element(n(x));
            let s = stage_of(&id, &DiagramOf(&p), &f, &b).unwrap().unwrap();
            assert_eq!(s, f.code().0 + 1u32);
        }
    }

    #[test]
    fn constant_and_identity_programs() {
        let p = identity_prog();
        let never = FnOracle(|_: &Nat| panic!("queried"));
        let out = p.run(&never, &n(7), 10);
        assert_eq!(out.output(), Some(&n(7)));
        assert!(out.used().is_empty());

        // identity through the join: read x back from the left diagram
        let mut a = Asm::new("id-join", 3);
        a.emit(Instr::Halt(0));
        let prog = a.finish();
        let g = Graph::new(GraphRule::Rado);
        let left = DiagramOf(&g);
        let map = PermGraph(&Perm::Identity);
        let join = JoinOracle { left: &left, map: &map, right: &left };
        for x in 0..20 {
            let out = prog.run(&join, &n(x), 100);
            assert_eq!(out.output(), Some(&n(x)));
            assert!(out.used().iter().all(|c| [n(3 * x), n(3 * x + 1), n(3 * x + 2)].contains(c)));
        }
    }

    #[test]
    fn out_of_budget_is_not_failure() {
        let mut a = Asm::new("spin", 1);
        a.label("top");
        a.jmp("top");
        let p = a.finish();
        let o = FnOracle(|_: &Nat| true);
        assert!(matches!(p.run(&o, &n(0), 50), RunOutcome::OutOfBudget { .. }));
    }

    #[test]
    fn validation_catches_bad_programs() {
        let p = OracleProgram {
            name: "bad".into(),
            registers: 1,
            code: vec![Instr::Mov(0, 3)],
            ops: vec![],
            progs: vec![],
            sims: vec![],
        };
        assert!(p.validate().is_err());
        let p = OracleProgram { code: vec![Instr::Jmp(4)], ..p };
        assert!(p.validate().is_err());
    }

    #[test]
    fn composition_with_identity() {
        let id = IsoProgram(Arc::new(identity_prog()));
        let c = compose_iso_programs(&id, &id);
        let o = FnOracle(|_: &Nat| false);
        let b = Budget::new(10_000);
        for x in 0..=50 {
            assert_eq!(c.apply(&o, &n(x), &b).unwrap(), n(x));
        }
    }

    #[test]
    fn image_of_restriction() {
        let g = Graph::new(GraphRule::Rado);
        let d = restrict(&g, &[n(0), n(1), n(2)]);
        let op = EnumerationOperator::complement(0);
        let b = Budget::new(1000);
        // Rado has 0-1; its complement does not
        let e01 = Fact::rel(true, 0, vec![n(0), n(1)]);
        assert_eq!(image_truth(&op, &d, &e01, &b).unwrap(), Some(false));
        let e02 = Fact::rel(true, 0, vec![n(0), n(2)]);
        assert_eq!(image_truth(&op, &d, &e02, &b).unwrap(), Some(true));
        let loop00 = Fact::rel(true, 0, vec![n(0), n(0)]);
        assert_eq!(image_truth(&op, &d, &loop00, &b).unwrap(), Some(false));
        let outside = Fact::element(n(9));
        assert_eq!(image_truth(&op, &d, &outside, &b).unwrap(), None);
    }
}
