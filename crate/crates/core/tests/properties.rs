use std::collections::BTreeSet;
use std::sync::Arc;

use enumfunctor::coding::{dec_tuple, decode_fact, enc_tuple_u64, nat, pair_u64, unpair, TupleCode};
use enumfunctor::interpretations::ComputableEquiv;
use enumfunctor::operators::{enum_apply_stage, Budget, Asm, Instr, RunOutcome, View};
use enumfunctor::transforms::interp_to_functor;
use enumfunctor::{programs, EffectiveInterpretation, EnumerationOperator, Fact, Nat, OracleProgram};
use proptest::prelude::*;

/// Queries codes with a stride that depends on the answers so far.
fn strider() -> OracleProgram {
    let (i, acc, q, one) = (1, 2, 3, 4);
    let mut a = Asm::new("strider", 5);
    a.set(i, 0);
    a.set(acc, 0);
    a.set(one, 1);
    a.label("loop");
    a.jlt(i, 0, "body");
    a.emit(Instr::Halt(acc));
    a.label("body");
    a.emit(Instr::Query(q, i, View::Base));
    a.emit(Instr::Add(acc, acc, q));
    a.emit(Instr::Add(i, i, one));
    a.emit(Instr::Add(i, i, acc));
    a.jmp("loop");
    a.finish()
}

fn set_of(codes: &[u64]) -> BTreeSet<Nat> {
    codes.iter().map(|&c| nat(c)).collect()
}

fn operators() -> Vec<EnumerationOperator> {
    let pair = interp_to_functor(Arc::new(EffectiveInterpretation::pair_intersection()), "pure-equality");
    vec![EnumerationOperator::identity(), EnumerationOperator::complement(0), (*pair.psi).clone()]
}

fn equivalences() -> Vec<ComputableEquiv> {
    vec![
        ComputableEquiv::CodeEquality,
        ComputableEquiv::UnorderedPair,
        ComputableEquiv::Coordinate { arity: 3, index: 1 },
        ComputableEquiv::Table(vec![vec![nat(2), nat(5), nat(9)], vec![nat(4), nat(7)]]),
    ]
}

proptest! {
    #[test]
    fn pairs_round_trip(a in 0u64..1 << 40, b in 0u64..1 << 40) {
        prop_assert_eq!(unpair(&pair_u64(a, b)), (nat(a), nat(b)));
    }

    #[test]
    fn tuples_round_trip(t in prop::collection::vec(0u64..10_000, 0..6)) {
        let back = dec_tuple(&enc_tuple_u64(&t));
        prop_assert_eq!(back, t.iter().map(|&x| nat(x)).collect::<Vec<_>>());
    }

    #[test]
    fn facts_round_trip(pos in any::<bool>(), rel in 0u64..4, args in prop::collection::vec(0u64..500, 1..4)) {
        let f = Fact::rel(pos, rel, args.iter().map(|&x| nat(x)).collect());
        prop_assert_eq!(decode_fact(&f.code()).unwrap(), f);
    }

    #[test]
    fn use_principle(x in 0u64..60, a in prop::collection::vec(0u64..200, 0..80), b in prop::collection::vec(0u64..200, 0..80)) {
        let prog = strider();
        let a = set_of(&a);
        let run = prog.run(&a, &nat(x), 10_000);
        let used = run.used().clone();
        // agree with `a` on the use, follow `b` everywhere else
        let mut other: BTreeSet<Nat> = set_of(&b).into_iter().filter(|c| !used.contains(c)).collect();
        other.extend(a.intersection(&used).cloned());
        prop_assert_eq!(prog.run(&other, &nat(x), 10_000).output().cloned(), run.output().cloned());
    }

    #[test]
    fn budget_monotone(x in 0u64..40, a in prop::collection::vec(0u64..200, 0..80), small in 1u64..200, extra in 0u64..500) {
        let prog = strider();
        let a = set_of(&a);
        if let RunOutcome::Halted { output, .. } = prog.run(&a, &nat(x), small) {
            prop_assert_eq!(prog.run(&a, &nat(x), small + extra).output().cloned(), Some(output));
        }
    }

    #[test]
    fn theta_budget_monotone(x in 0u64..20, small in 1u64..400, extra in 0u64..400) {
        let prog = programs::theta(Arc::new(EnumerationOperator::identity()));
        let oracle: BTreeSet<Nat> = (0..20).map(|e| Fact::element(nat(e)).code().0).collect();
        if let Some(out) = prog.run(&oracle, &nat(x), small).output().cloned() {
            prop_assert_eq!(prog.run(&oracle, &nat(x), small + extra).output().cloned(), Some(out));
        }
    }

    #[test]
    fn equivalence_axioms(x in 0u64..3000, y in 0u64..3000, k in 0u64..4) {
        for sim in equivalences() {
            let (x, y) = (nat(x), nat(y));
            prop_assert!(sim.decide(&x, &x));
            prop_assert_eq!(sim.decide(&x, &y), sim.decide(&y, &x));
            let rep = sim.least_code(&x, &Budget::new(1)).unwrap();
            prop_assert!(rep <= x && sim.decide(&rep, &x));
            prop_assert_eq!(sim.least_code(&rep, &Budget::new(1)).unwrap(), rep.clone());
            if x < nat(300) {
                prop_assert_eq!(sim.least_code_search(&x), rep.clone());
            }
            // transitivity through another member of the class
            if let Some(z) = sim.class_member(&rep, &nat(k)) {
                prop_assert!(sim.decide(&z, &rep));
                prop_assert_eq!(sim.decide(&z, &y), sim.decide(&x, &y));
            }
        }
    }
}

proptest! {
    // the synthesized operator is slow to apply, so fewer cases
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn stages_and_oracles_monotone(big in prop::collection::vec(0u64..400, 0..120), keep in prop::collection::vec(any::<bool>(), 120), s in 0u64..300, t in 0u64..300) {
        let big_set = set_of(&big);
        let small_set: BTreeSet<Nat> = big.iter().zip(&keep).filter(|(_, k)| **k).map(|(&c, _)| nat(c)).collect();
        let (s, t) = (s.min(t), s.max(t));
        for op in operators() {
            let early = enum_apply_stage(&op, &small_set, s);
            prop_assert!(early.is_subset(&enum_apply_stage(&op, &small_set, t)));
            prop_assert!(early.is_subset(&enum_apply_stage(&op, &big_set, s)));
        }
    }
}

#[test]
fn tuple_codes_are_dense() {
    for c in 0..2000u64 {
        let t = dec_tuple(&TupleCode(nat(c)));
        assert_eq!(enumfunctor::coding::enc_tuple(&t).0, nat(c));
    }
}
