//! End-to-end acceptance run. Prints one line per criterion, then fails if
//! any criterion failed.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use enumfunctor::coding::{dec_tuple, decode_fact, enc_tuple, nat, pair_u64, unpair, TupleCode};
use enumfunctor::examples::{run_example, RunConfig, NEGATIVE_CONTROLS};
use enumfunctor::functors::check_nested_restrictions;
use enumfunctor::programs;
use enumfunctor::structures::{builtin, Perm};
use enumfunctor::transforms::{
    bitransform_upgrade, check_prepend, complement_witness, enum_to_computable, interp_to_functor, round_trip_report,
    verify_bitransform, verify_enum_to_computable, verify_interp_to_functor, Bounds,
};
use enumfunctor::{EffectiveInterpretation, EnumerableFunctor, Report, Signature, Verdict};

type Outcome = Result<(), String>;

fn all_pass(label: &str, r: &Report) -> Outcome {
    match r.checks.iter().find(|c| c.verdict != Verdict::Pass) {
        None => Ok(()),
        Some(c) => Err(format!("{label}: {}", c.line())),
    }
}

fn coding() -> Outcome {
    for a in 0..=200u64 {
        for b in 0..=200u64 {
            if unpair(&pair_u64(a, b)) != (nat(a), nat(b)) {
                return Err(format!("pair({a},{b})"));
            }
        }
    }
    for c in 0..=5000u64 {
        let t = dec_tuple(&TupleCode(nat(c)));
        if enc_tuple(&t).0 != nat(c) {
            return Err(format!("tuple code {c}"));
        }
    }
    let mut facts = 0;
    for c in 0..=5000u64 {
        if let Ok(f) = decode_fact(&enumfunctor::FactCode(nat(c))) {
            facts += 1;
            if f.code().0 != nat(c) {
                return Err(format!("fact code {c}"));
            }
        }
    }
    if facts == 0 {
        return Err("no well-formed fact codes".into());
    }
    Ok(())
}

fn nested_restrictions() -> Outcome {
    let pair = interp_to_functor(Arc::new(EffectiveInterpretation::pair_intersection()), "pure-equality");
    let cases = [
        (EnumerableFunctor::identity("rado", Signature::graph()), "rado"),
        (EnumerableFunctor::identity("pure-equality", Signature::empty()), "pure-equality"),
        (EnumerableFunctor::complement("rado"), "rado"),
        (EnumerableFunctor::complement_over("pure-equality", Signature::empty()), "pure-equality"),
        (pair, "pure-equality"),
    ];
    for (f, s) in &cases {
        let p = builtin(s).map_err(|e| e.to_string())?;
        if let Verdict::Fail { witness } = check_nested_restrictions(f, p.as_ref(), 6, 2000) {
            return Err(format!("{} on {s}: witness={witness}", f.name));
        }
    }
    Ok(())
}

fn enum_to_comp() -> Outcome {
    let cases = [
        EnumerableFunctor::identity("pure-equality", Signature::empty()),
        EnumerableFunctor::identity("complete-graph", Signature::graph()),
        EnumerableFunctor::identity("rado", Signature::graph()),
        EnumerableFunctor::complement_over("pure-equality", Signature::empty()),
        EnumerableFunctor::complement("complete-graph"),
        EnumerableFunctor::complement("rado"),
    ];
    for f in &cases {
        let a = builtin(&f.source).map_err(|e| e.to_string())?;
        let up = enum_to_computable(f);
        let r = verify_enum_to_computable(f, &up, &a, &Bounds::default()).map_err(|e| e.to_string())?;
        all_pass(&format!("{} on {}", f.name, f.source), &r)?;
    }
    Ok(())
}

fn interp_functor() -> Outcome {
    let i = Arc::new(EffectiveInterpretation::pair_intersection());
    let a = builtin("pure-equality").map_err(|e| e.to_string())?;
    let r = verify_interp_to_functor(&i, &a, 6, 300, &Bounds::default()).map_err(|e| e.to_string())?;
    all_pass("pair-intersection", &r)
}

fn round_trip() -> Outcome {
    let a = builtin("rado").map_err(|e| e.to_string())?;
    let f = EnumerableFunctor::complement("rado");
    let b = Bounds { prefix: 12, ..Bounds::default() };
    let r = round_trip_report(&f, &a, 2, &Perm::SwapPairs, &b).map_err(|e| e.to_string())?;
    all_pass("complement on rado", &r)
}

fn bitransform() -> Outcome {
    let a = builtin("rado").map_err(|e| e.to_string())?;
    let w = complement_witness("rado");
    let up = bitransform_upgrade(&w);
    let r = verify_bitransform(&w, &up, &a, 20, 1_000_000).map_err(|e| e.to_string())?;
    all_pass("complement witness", &r)
}

fn prepend() -> Outcome {
    let r = check_prepend(&Arc::new(programs::evens()), &Arc::new(programs::divisible_rows()), 100, 10_000);
    all_pass("evens before multiples", &r)
}

fn negative_controls() -> Outcome {
    for name in NEGATIVE_CONTROLS {
        let r = run_example(name, &RunConfig::default()).map_err(|e| e.to_string())?;
        if !r.checks.iter().any(|c| matches!(c.verdict, Verdict::Fail { .. })) {
            return Err(format!("{name} produced no failing check"));
        }
    }
    Ok(())
}

fn determinism() -> Outcome {
    let cfg = RunConfig::default();
    let first = run_example("complement-rado", &cfg).map_err(|e| e.to_string())?.render_text();
    let second = run_example("complement-rado", &cfg).map_err(|e| e.to_string())?.render_text();
    if first == second {
        Ok(())
    } else {
        Err("reports differ between runs".into())
    }
}

/// Wall-clock limits in seconds; determinism has none.
type Criterion = (&'static str, Option<f64>, fn() -> Outcome);

const CRITERIA: [Criterion; 9] = [
    ("coding round-trips", Some(1.0), coding),
    ("nested restrictions", Some(10.0), nested_restrictions),
    ("enumerable to computable", Some(60.0), enum_to_comp),
    ("interpretation to functor", Some(30.0), interp_functor),
    ("functor to interpretation round trip", Some(60.0), round_trip),
    ("bi-transform upgrade", Some(60.0), bitransform),
    ("prepend identities", Some(1.0), prepend),
    ("negative controls fail", Some(5.0), negative_controls),
    ("deterministic reports", None, determinism),
];

// Runs without the test harness so the criterion lines are never captured.
fn main() -> ExitCode {
    let mut failed = Vec::new();
    for (i, (name, limit, run)) in CRITERIA.iter().enumerate() {
        let t = Instant::now();
        let mut outcome = run();
        let secs = t.elapsed().as_secs_f64();
        if let (Ok(()), Some(limit)) = (&outcome, limit) {
            if secs > *limit {
                outcome = Err(format!("over the {limit}s limit"));
            }
        }
        match &outcome {
            Ok(()) => println!("criterion {} {name}: pass ({secs:.2}s)", i + 1),
            Err(why) => {
                println!("criterion {} {name}: fail ({secs:.2}s) {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
