use enumfunctor::coding::nat;
use enumfunctor::examples::{example_bundle, run_bundle, run_example, transform, RunConfig, DIRECTIONS, EXAMPLES};
use enumfunctor::formats::{parse_bundle, parse_structure, write_bundle, write_structure, Bundle};
use enumfunctor::structures::{diagram_prefix, FiniteStructure};
use enumfunctor::{Error, Fact, Signature, Verdict};

fn bundles() -> Vec<(&'static str, Bundle)> {
    EXAMPLES.iter().map(|e| (e.name, example_bundle(e.name).unwrap())).collect()
}

#[test]
fn every_example_passes_with_defaults() {
    let cfg = RunConfig::default();
    for e in EXAMPLES {
        let r = run_example(e.name, &cfg).unwrap();
        assert!(!r.has_failure(), "{}", r.render_text());
        assert!(!r.checks.is_empty());
    }
}

#[test]
fn identity_example_is_fully_decided() {
    let r = run_example("identity-functor", &RunConfig::default()).unwrap();
    assert_eq!(r.count("inconclusive"), 0);
}

#[test]
fn tiny_budget_is_inconclusive_not_failing() {
    let cfg = RunConfig { budget: 1, axiom_budget: 1, ..RunConfig::default() };
    let r = run_example("complement-rado", &cfg).unwrap();
    assert!(!r.has_failure(), "{}", r.render_text());
    assert!(r.count("inconclusive") > 0);
}

#[test]
fn bundles_round_trip_through_text() {
    for (name, b) in bundles() {
        let text = write_bundle(&b);
        let again = parse_bundle(name, &text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(write_bundle(&again), text, "{name}");
    }
}

#[test]
fn transforms_emit_parseable_deterministic_artifacts() {
    let mut produced = 0;
    for (name, b) in bundles() {
        for dir in DIRECTIONS {
            let Ok(out) = transform(b.clone(), dir) else { continue };
            produced += 1;
            let text = write_bundle(&out);
            assert_eq!(write_bundle(&transform(b.clone(), dir).unwrap()), text, "{name} {dir}");
            let back = parse_bundle("out", &text).unwrap_or_else(|e| panic!("{name} {dir}: {e}"));
            assert_eq!(write_bundle(&back), text);
        }
    }
    assert!(produced >= 4);
}

#[test]
fn wrong_kind_is_a_typed_error() {
    let b = example_bundle("prepend-evens").unwrap();
    assert!(matches!(transform(b, "functor2interp"), Err(Error::KindMismatch { .. })));
    let b = example_bundle("identity-functor").unwrap();
    assert!(matches!(transform(b, "interp2functor"), Err(Error::KindMismatch { .. })));
    let b = example_bundle("identity-functor").unwrap();
    assert!(matches!(transform(b, "sideways"), Err(Error::UnknownName(_))));
}

#[test]
fn synthesized_functor_verifies_after_reparse() {
    let b = transform(example_bundle("pair-intersection-interp").unwrap(), "interp2functor").unwrap();
    let b = parse_bundle("pi", &write_bundle(&b)).unwrap();
    let r = run_bundle("pi", &b, &RunConfig::default()).unwrap();
    assert!(!r.has_failure(), "{}", r.render_text());
}

#[test]
fn upgraded_functor_verifies() {
    let b = transform(example_bundle("complement-complete").unwrap(), "enum2comp").unwrap();
    assert_eq!(b.kind(), "computable-functor");
    let r = run_bundle("cc", &b, &RunConfig::default()).unwrap();
    assert!(!r.has_failure(), "{}", r.render_text());
}

#[test]
fn prepended_sequence_decides() {
    let b = transform(example_bundle("prepend-evens").unwrap(), "prepend").unwrap();
    let r = run_bundle("seq", &b, &RunConfig::default()).unwrap();
    assert_eq!(r.get("decides"), Some(&Verdict::Pass));
}

#[test]
fn parse_errors_name_the_line() {
    let mut text = write_bundle(&example_bundle("identity-functor").unwrap());
    text.push_str("GARBAGE here\n");
    let lines = text.lines().count();
    match parse_bundle("broken.txt", &text) {
        Err(Error::Parse { file, line, .. }) => {
            assert_eq!(file, "broken.txt");
            assert!(line >= 1 && line <= lines, "line {line}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn structure_files_round_trip() {
    let n = nat;
    let facts = vec![
        Fact::element(n(0)),
        Fact::element(n(1)),
        Fact::element(n(2)),
        Fact::rel(true, 0, vec![n(0), n(1)]),
        Fact::rel(true, 0, vec![n(1), n(0)]),
    ];
    let s = FiniteStructure::from_facts("path", Signature::graph(), &facts).unwrap();
    let text = write_structure(&s);
    let p = parse_structure("path.txt", &text).unwrap();
    assert_eq!(diagram_prefix(p.as_ref(), 400), diagram_prefix(&s, 400));
}
