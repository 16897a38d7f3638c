//! Generators for the oracle programs the transforms emit.

use std::sync::Arc;

use crate::interpretations::ComputableEquiv;
use crate::operators::{Asm, EnumerationOperator, Instr, OracleProgram, Reg, View};

// Fixed constants every generated program loads first.
const ONE: Reg = 1;
const TWO: Reg = 2;
const FOUR: Reg = 3;

fn prelude(a: &mut Asm) {
    a.set(ONE, 1);
    a.set(TWO, 2);
    a.set(FOUR, 4);
}

/// Emits the decoding loop over the tuple code in `t`, running `map` on
/// each entry (held in `x`) and leaving the rebuilt code in `t`.
fn emit_map_tuple(a: &mut Asm, tag: &str, t: Reg, x: Reg, acc: Reg, out: Reg, map: &mut dyn FnMut(&mut Asm)) {
    a.set(acc, 0);
    a.label(&format!("{tag}-loop"));
    a.jz(t, &format!("{tag}-rev"));
    a.emit(Instr::Sub(t, t, ONE));
    a.emit(Instr::Unpair(x, t, t));
    map(a);
    a.emit(Instr::Pair(acc, x, acc));
    a.emit(Instr::Add(acc, acc, ONE));
    a.jmp(&format!("{tag}-loop"));
    // the loop built the list backwards
    a.label(&format!("{tag}-rev"));
    a.set(out, 0);
    a.label(&format!("{tag}-rloop"));
    a.jz(acc, &format!("{tag}-done"));
    a.emit(Instr::Sub(acc, acc, ONE));
    a.emit(Instr::Unpair(x, acc, acc));
    a.emit(Instr::Pair(out, x, out));
    a.emit(Instr::Add(out, out, ONE));
    a.jmp(&format!("{tag}-rloop"));
    a.label(&format!("{tag}-done"));
    a.emit(Instr::Mov(t, out));
}

pub fn identity() -> OracleProgram {
    let mut a = Asm::new("identity", 1);
    a.emit(Instr::Halt(0));
    a.finish()
}

pub fn constant(v: u64) -> OracleProgram {
    let mut a = Asm::new(&format!("constant-{v}"), 1);
    a.set(0, v);
    a.emit(Instr::Halt(0));
    a.finish()
}

/// Reads `f(x)` off the map component of a join oracle.
pub fn projection() -> OracleProgram {
    let mut a = Asm::new("projection", 1);
    a.emit(Instr::Lookup(0, 0, View::map()));
    a.emit(Instr::Halt(0));
    a.finish()
}

/// 1 on even inputs, 0 on odd ones.
pub fn evens() -> OracleProgram {
    let mut a = Asm::new("evens", 4);
    prelude(&mut a);
    a.label("loop");
    a.jlt(0, TWO, "end");
    a.emit(Instr::Sub(0, 0, TWO));
    a.jmp("loop");
    a.label("end");
    a.jz(0, "even");
    a.set(0, 0);
    a.emit(Instr::Halt(0));
    a.label("even");
    a.set(0, 1);
    a.emit(Instr::Halt(0));
    a.finish()
}

/// Row `i` holds the multiples of `i + 1`.
pub fn divisible_rows() -> OracleProgram {
    let (i, x, d, res) = (4, 5, 6, 7);
    let mut a = Asm::new("divisible-rows", 8);
    prelude(&mut a);
    a.emit(Instr::Unpair(i, x, 0));
    a.emit(Instr::Add(d, i, ONE));
    a.label("loop");
    a.jlt(x, d, "done");
    a.emit(Instr::Sub(x, x, d));
    a.jmp("loop");
    a.label("done");
    a.set(res, 1);
    a.jz(x, "out");
    a.set(res, 0);
    a.label("out");
    a.emit(Instr::Halt(res));
    a.finish()
}

/// Writes the code of `x = x` for the element in `x` into `dst`.
fn emit_element_code(a: &mut Asm, dst: Reg, x: Reg, zero: Reg) {
    a.emit(Instr::Pair(dst, x, x));
    a.set(zero, 0);
    a.emit(Instr::Pair(dst, zero, dst));
}

/// `x ↦ ⟨x, s⟩` with `s` the least stage enumerating `x = x`. Loops on
/// non-elements.
pub fn theta(op: Arc<EnumerationOperator>) -> OracleProgram {
    let mut a = Asm::new(&format!("theta[{}]", op.name), 8);
    let o = a.op(op);
    prelude(&mut a);
    emit_element_code(&mut a, 4, 0, 5);
    a.emit(Instr::Stage(6, o, 4, View::Base));
    a.label("spin");
    a.jz(6, "spin");
    a.emit(Instr::Sub(6, 6, ONE));
    a.emit(Instr::Pair(7, 0, 6));
    a.emit(Instr::Halt(7));
    a.finish()
}

/// `⟨x, s⟩ ↦ x`.
pub fn theta_inverse() -> OracleProgram {
    let mut a = Asm::new("theta-inverse", 2);
    a.emit(Instr::Unpair(0, 1, 0));
    a.emit(Instr::Halt(0));
    a.finish()
}

/// `⟨b, s⟩ ↦ b + 1` when `s` is the least stage of `b = b`, else 0.
pub fn pullback(op: Arc<EnumerationOperator>) -> OracleProgram {
    let mut a = Asm::new(&format!("pullback[{}]", op.name), 9);
    let o = a.op(op);
    prelude(&mut a);
    a.emit(Instr::Unpair(4, 5, 0));
    emit_element_code(&mut a, 6, 4, 7);
    a.emit(Instr::Stage(8, o, 6, View::Base));
    a.jz(8, "no");
    a.emit(Instr::Sub(8, 8, ONE));
    a.jeq(8, 5, "yes");
    a.label("no");
    a.set(0, 0);
    a.emit(Instr::Halt(0));
    a.label("yes");
    a.emit(Instr::Add(4, 4, ONE));
    a.emit(Instr::Halt(4));
    a.finish()
}

/// Decides a fact code by sending each argument through `elem` (which
/// answers `value + 1`, or 0 to reject) and querying the result in
/// `query_view`. Malformed or rejected facts get 0.
fn map_fact(a: &mut Asm, elem: usize, elem_view: View, query_view: View) {
    let (tag, payload, x, y, t, acc, out, res) = (4, 5, 6, 7, 8, 9, 10, 12);
    prelude(a);
    a.emit(Instr::Unpair(tag, payload, 0));
    a.jlt(tag, TWO, "eq");
    a.jlt(tag, FOUR, "rel");
    a.jmp("fail");

    let map_reg = |a: &mut Asm, r: Reg| {
        a.emit(Instr::Call(r, elem, r, elem_view.clone()));
        a.jz(r, "fail");
        a.emit(Instr::Sub(r, r, ONE));
    };
    a.label("eq");
    a.emit(Instr::Unpair(x, y, payload));
    map_reg(a, x);
    map_reg(a, y);
    a.emit(Instr::Pair(payload, x, y));
    a.jmp("build");

    a.label("rel");
    a.emit(Instr::Unpair(y, t, payload));
    emit_map_tuple(a, "args", t, x, acc, out, &mut |a| map_reg(a, x));
    a.emit(Instr::Pair(payload, y, t));

    a.label("build");
    a.emit(Instr::Pair(0, tag, payload));
    a.emit(Instr::Query(res, 0, query_view));
    a.emit(Instr::Halt(res));
    a.label("fail");
    a.set(res, 0);
    a.emit(Instr::Halt(res));
}

/// Decides `G(A)` for the universe of pairs `⟨b, s⟩`: pulls each argument
/// back to `b` and asks the image `Ψ^A`.
pub fn decide_pulled(op: Arc<EnumerationOperator>) -> OracleProgram {
    let mut a = Asm::new(&format!("decide[{}]", op.name), 13);
    let pb = a.prog(Arc::new(pullback(op.clone())));
    let o = a.op(op);
    map_fact(&mut a, pb, View::Base, View::Image(o, Box::new(View::Base)));
    a.finish()
}

/// `⟨b, s⟩ ↦ ⟨F(f)(b), s'⟩` over the join `A ⊕ f ⊕ Ã`.
pub fn conjugate_star(op: Arc<EnumerationOperator>, phi_star: Arc<OracleProgram>) -> OracleProgram {
    let mut a = Asm::new(&format!("star[{}]", op.name), 10);
    let ps = a.prog(phi_star);
    let o = a.op(op);
    prelude(&mut a);
    a.emit(Instr::Unpair(4, 5, 0));
    a.emit(Instr::Call(6, ps, 4, View::Base));
    emit_element_code(&mut a, 7, 6, 8);
    a.emit(Instr::Stage(9, o, 7, View::right()));
    a.label("spin");
    a.jz(9, "spin");
    a.emit(Instr::Sub(9, 9, ONE));
    a.emit(Instr::Pair(0, 6, 9));
    a.emit(Instr::Halt(0));
    a.finish()
}

/// Maps a tuple code coordinatewise through the join's map and returns
/// the least equivalent code.
pub fn tuple_lift_rep(sim: ComputableEquiv) -> OracleProgram {
    let mut a = Asm::new("tuple-lift", 8);
    let s = a.sim(sim);
    prelude(&mut a);
    emit_map_tuple(&mut a, "coords", 0, 4, 5, 6, &mut |a| a.emit(Instr::Lookup(4, 4, View::map())));
    a.emit(Instr::Rep(7, s, 0));
    a.emit(Instr::Halt(7));
    a.finish()
}

/// `i ↦ enc([0; dim] ++ [i] ++ [0; tail])`.
pub fn embed_coordinate(dim: usize, tail: usize) -> OracleProgram {
    let (acc, zero) = (4, 5);
    let mut a = Asm::new(&format!("embed-{dim}-{tail}"), 6);
    prelude(&mut a);
    a.set(acc, 0);
    a.set(zero, 0);
    let cons = |a: &mut Asm, head: Reg| {
        a.emit(Instr::Pair(acc, head, acc));
        a.emit(Instr::Add(acc, acc, ONE));
    };
    for _ in 0..tail {
        cons(&mut a, zero);
    }
    cons(&mut a, 0);
    for _ in 0..dim {
        cons(&mut a, zero);
    }
    a.emit(Instr::Halt(acc));
    a.finish()
}

/// Row 0 is `x`; row `i + 1` is row `i` of `seq`.
pub fn prepend(x: Arc<OracleProgram>, seq: Arc<OracleProgram>) -> OracleProgram {
    let mut a = Asm::new(&format!("prepend[{}]", x.name), 6);
    let px = a.prog(x);
    let ps = a.prog(seq);
    prelude(&mut a);
    a.emit(Instr::Unpair(4, 5, 0));
    a.jz(4, "row0");
    a.emit(Instr::Sub(4, 4, ONE));
    a.emit(Instr::Pair(0, 4, 5));
    a.emit(Instr::Call(0, ps, 0, View::Base));
    a.emit(Instr::Halt(0));
    a.label("row0");
    a.emit(Instr::Call(0, px, 5, View::Base));
    a.emit(Instr::Halt(0));
    a.finish()
}

/// One step of a [`chain`].
pub struct Step {
    pub prog: Arc<OracleProgram>,
    pub view: ChainView,
}

/// Views a chain step can run under, all relative to the chain's oracle.
pub enum ChainView {
    Base,
    /// `Ψ^base`.
    Image(Arc<EnumerationOperator>),
    /// `Ψ^base ⊕ graph(θ^base) ⊕ decide^base`.
    ImageJoin { op: Arc<EnumerationOperator>, theta: Arc<OracleProgram>, decide: Arc<OracleProgram> },
}

/// Runs the steps in order, each on the previous output.
pub fn chain(name: &str, steps: Vec<Step>) -> OracleProgram {
    let mut a = Asm::new(name, 1);
    let mut code = Vec::new();
    for s in steps {
        let view = match s.view {
            ChainView::Base => View::Base,
            ChainView::Image(op) => View::Image(a.op(op), Box::new(View::Base)),
            ChainView::ImageJoin { op, theta, decide } => {
                let o = a.op(op);
                let t = a.prog(theta);
                let d = a.prog(decide);
                View::Join(
                    Box::new(View::Image(o, Box::new(View::Base))),
                    Box::new(View::Graph(t, Box::new(View::Base))),
                    Box::new(View::Decide(d, Box::new(View::Base))),
                )
            }
        };
        let p = a.prog(s.prog);
        code.push(Instr::Call(0, p, 0, view));
    }
    for ins in code {
        a.emit(ins);
    }
    a.emit(Instr::Halt(0));
    a.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{dec_tuple, enc_tuple, nat, pair, Fact, Nat, TupleCode};
    use crate::operators::{Budget, DiagramOf, FnOracle, JoinOracle, PermGraph};
    use crate::structures::{Perm, PureEquality};

    fn n(v: u64) -> Nat {
        nat(v)
    }

    fn run(p: &OracleProgram, o: &dyn crate::operators::Oracle, x: Nat) -> Nat {
        p.exec(o, &x, &Budget::new(100_000)).unwrap()
    }

    #[test]
    fn evens_and_prepend() {
        let none = FnOracle(|_: &Nat| false);
        let e = evens();
        assert_eq!(run(&e, &none, n(4)), n(1));
        assert_eq!(run(&e, &none, n(3)), n(0));
        let seq = Arc::new(constant(7));
        let p = prepend(Arc::new(e), seq);
        assert_eq!(run(&p, &none, pair(&n(0), &n(4))), n(1));
        assert_eq!(run(&p, &none, pair(&n(1), &n(4))), n(7));
    }

    #[test]
    fn theta_on_identity() {
        let op = Arc::new(EnumerationOperator::identity());
        let p = PureEquality::default();
        let o = DiagramOf(&p);
        let th = theta(op.clone());
        let back = theta_inverse();
        let pb = pullback(op);
        for x in 0..30 {
            let e = run(&th, &o, n(x));
            assert_eq!(e, pair(&n(x), &(Fact::element(n(x)).code().0 + 1u32)));
            assert_eq!(run(&back, &o, e.clone()), n(x));
            assert_eq!(run(&pb, &o, e.clone()), n(x + 1));
            assert_eq!(run(&pb, &o, e + 1u32), n(0));
        }
    }

    #[test]
    fn tuple_lift_applies_map() {
        let left = FnOracle(|_: &Nat| true);
        let perm = Perm::SwapPairs;
        let map = PermGraph(&perm);
        let join = JoinOracle { left: &left, map: &map, right: &left };
        let p = tuple_lift_rep(ComputableEquiv::UnorderedPair);
        let out = run(&p, &join, enc_tuple(&[n(2), n(5)]).0);
        let t = dec_tuple(&TupleCode(out));
        let mut t2 = t.clone();
        t2.sort();
        assert_eq!(t2, vec![n(3), n(4)]);
    }

    #[test]
    fn embedding_places_coordinate() {
        let none = FnOracle(|_: &Nat| false);
        let p = embed_coordinate(2, 1);
        assert_eq!(run(&p, &none, n(9)), enc_tuple(&[n(0), n(0), n(9), n(0)]).0);
    }
}
