//! Built-in examples, run configuration, and the runner shared by the
//! command line and the tests.

use std::sync::Arc;

use crate::coding::{enc_tuple_u64, Nat};
use crate::error::{Error, Result};
use crate::formats::Bundle;
use crate::functors::{check_functor_laws, check_nested_restrictions, functor_image, EnumerableFunctor, Functor, LawCase};
use crate::interpretations::{check_congruence, EffectiveInterpretation};
use crate::operators::{Budget, DiagramOf, DEFAULT_AXIOM_BUDGET, DEFAULT_STEP_BUDGET};
use crate::programs;
use crate::report::{Report, Verdict};
use crate::structures::{builtin, Perm, Signature};
use crate::transforms::{
    bitransform_upgrade, check_prepend, check_star_congruence, complement_witness, enum_to_computable,
    functor_to_interp, interp_to_functor, prepend_computable, round_trip_report, sample_isos,
    verify_bitransform, verify_enum_to_computable, verify_interp_to_functor, Bounds,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    /// Stage bound for operator application.
    pub stage: u64,
    /// Elements examined by map and law checks.
    pub prefix: usize,
    /// Steps per program run or image query.
    pub budget: u64,
    /// Work per formula search.
    pub axiom_budget: u64,
    pub format: Format,
    /// Treat inconclusive verdicts as failures.
    pub strict: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            stage: 2000,
            prefix: 12,
            budget: 20 * DEFAULT_STEP_BUDGET,
            axiom_budget: DEFAULT_AXIOM_BUDGET,
            format: Format::Text,
            strict: false,
        }
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let num = |v: &str| v.parse::<u64>().map_err(|_| format!("`{key}` needs a number, got `{v}`"));
        match key {
            "stage" => self.stage = num(value)?,
            "prefix" => self.prefix = num(value)? as usize,
            "budget" => self.budget = num(value)?,
            "axiom-budget" => self.axiom_budget = num(value)?,
            "format" => {
                self.format = match value {
                    "text" => Format::Text,
                    "structured" => Format::Structured,
                    other => return Err(format!("unknown format `{other}`")),
                }
            }
            "strict" => {
                self.strict = value.parse().map_err(|_| format!("`strict` needs true or false, got `{value}`"))?
            }
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        for (k, v) in [("stage", self.stage), ("prefix", self.prefix as u64), ("budget", self.budget), ("axiom-budget", self.axiom_budget)] {
            if v == 0 {
                return Err(format!("`{k}` must be positive"));
            }
        }
        Ok(())
    }

    fn bounds(&self) -> Bounds {
        Bounds { prefix: self.prefix, law_prefix: self.prefix, fact_bound: self.stage.min(500), budget: self.budget, ..Bounds::default() }
    }
}

/// `key = value` lines over the defaults.
pub fn parse_config(file: &str, text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse = |msg: String| Error::Parse { file: file.into(), line: i + 1, msg };
        let (k, v) = line.split_once('=').ok_or_else(|| parse("expected key = value".into()))?;
        cfg.set(k.trim(), v.trim()).map_err(parse)?;
    }
    cfg.validate().map_err(|msg| Error::Parse { file: file.into(), line: 0, msg })?;
    Ok(cfg)
}

pub struct Example {
    pub name: &'static str,
    pub summary: &'static str,
}

pub const EXAMPLES: &[Example] = &[
    Example { name: "identity-functor", summary: "identity functor on pure equality" },
    Example { name: "complement-complete", summary: "edge complement of the complete graph" },
    Example { name: "complement-rado", summary: "edge complement of the random graph" },
    Example { name: "pair-intersection-interp", summary: "unordered pairs of pure equality, adjacent when they meet" },
    Example { name: "prepend-evens", summary: "the even numbers prepended to a decidable sequence" },
    Example { name: "bitransform-rado", summary: "complement as its own pseudo-inverse on the random graph" },
];

/// Fixtures that are meant to fail; runnable by name but not listed.
pub const NEGATIVE_CONTROLS: &[&str] = &["broken-star", "broken-sim"];

fn law_report(f: &Functor, structure: &str, cfg: &RunConfig) -> Result<Report> {
    let p = builtin(structure)?;
    let oracle = DiagramOf(p.as_ref());
    let inputs = functor_image(f, &oracle, cfg.budget).elements(cfg.prefix, Bounds::default().scan)?;
    let case = LawCase { name: structure.into(), presentation: p.clone(), inputs };
    Ok(check_functor_laws(f, &[case], &sample_isos(), cfg.budget))
}

fn enumerable_checks(report: &mut Report, f: &EnumerableFunctor, cfg: &RunConfig) -> Result<()> {
    let p = builtin(&f.source)?;
    report.absorb("", law_report(&Functor::Enumerable(f.clone()), &f.source, cfg)?);
    report.push(format!("substructure[{}]", f.source), check_nested_restrictions(f, p.as_ref(), 6, cfg.stage));
    let up = enum_to_computable(f);
    report.absorb("enum2comp-", verify_enum_to_computable(f, &up, &p, &cfg.bounds())?);
    Ok(())
}

/// Samples `([a, b], [b, a])` for `a != b`.
fn pair_samples(count: usize) -> Vec<(Nat, Nat)> {
    let mut out = Vec::new();
    'outer: for b in 1..u64::MAX {
        for a in 0..b {
            if out.len() == count {
                break 'outer;
            }
            out.push((enc_tuple_u64(&[a, b]).0, enc_tuple_u64(&[b, a]).0));
        }
    }
    out
}

fn interp_checks(report: &mut Report, interp: EffectiveInterpretation, structure: &str, cfg: &RunConfig) -> Result<()> {
    let p = builtin(structure)?;
    let interp = Arc::new(interp);
    report.absorb("", verify_interp_to_functor(&interp, &p, 6, 300, &cfg.bounds())?);
    let oracle = DiagramOf(p.as_ref());
    let samples = if interp.dom_arity == 2 { pair_samples(200) } else { Vec::new() };
    report.push("congruence", check_congruence(&interp, &oracle, &samples, cfg.axiom_budget)?);
    let f = interp_to_functor(interp, structure);
    report.absorb("functor-", law_report(&Functor::Enumerable(f), structure, cfg)?);
    Ok(())
}

pub fn run_example(name: &str, cfg: &RunConfig) -> Result<Report> {
    let mut report = Report::new(name);
    match name {
        "identity-functor" => {
            let f = EnumerableFunctor::identity("pure-equality", Signature::empty());
            enumerable_checks(&mut report, &f, cfg)?;
            let p = builtin("pure-equality")?;
            report.absorb("round-trip-", round_trip_report(&f, &p, 2, &Perm::SwapPairs, &cfg.bounds())?);
        }
        "complement-complete" => enumerable_checks(&mut report, &EnumerableFunctor::complement("complete-graph"), cfg)?,
        "complement-rado" => {
            let f = EnumerableFunctor::complement("rado");
            enumerable_checks(&mut report, &f, cfg)?;
            let p = builtin("rado")?;
            report.absorb("round-trip-", round_trip_report(&f, &p, 2, &Perm::SwapPairs, &cfg.bounds())?);
            report.push("star-congruence", check_star_congruence(&f, &p, 2, 10, 200, cfg.axiom_budget)?);
        }
        "pair-intersection-interp" => {
            interp_checks(&mut report, EffectiveInterpretation::pair_intersection(), "pure-equality", cfg)?
        }
        "prepend-evens" => report.absorb(
            "",
            check_prepend(&Arc::new(programs::evens()), &Arc::new(programs::divisible_rows()), 100, cfg.budget),
        ),
        "bitransform-rado" => {
            let w = complement_witness("rado");
            let up = bitransform_upgrade(&w);
            report.absorb("", verify_bitransform(&w, &up, &builtin("rado")?, cfg.prefix, cfg.budget)?);
        }
        "broken-star" => {
            let f = Functor::Enumerable(EnumerableFunctor::broken_star("rado", Signature::graph()));
            report.absorb("", law_report(&f, "rado", cfg)?);
        }
        "broken-sim" => {
            let interp = EffectiveInterpretation::broken_sim();
            let p = builtin("pure-equality")?;
            let oracle = DiagramOf(p.as_ref());
            let samples = vec![(enc_tuple_u64(&[1, 2]).0, enc_tuple_u64(&[0, 1]).0)];
            report.push("congruence", check_congruence(&interp, &oracle, &samples, cfg.axiom_budget)?);
        }
        other => return Err(Error::UnknownName(other.into())),
    }
    Ok(report)
}

/// Checks appropriate to a bundle read from a file.
pub fn run_bundle(name: &str, b: &Bundle, cfg: &RunConfig) -> Result<Report> {
    let mut report = Report::new(name);
    match b {
        Bundle::Functor(Functor::Enumerable(f)) => enumerable_checks(&mut report, f, cfg)?,
        Bundle::Functor(f @ Functor::Computable(c)) => report.absorb("", law_report(f, &c.source, cfg)?),
        Bundle::Interpretation { structure, interp } => interp_checks(&mut report, interp.clone(), structure, cfg)?,
        Bundle::Prepend { row, seq } => {
            report.absorb("", check_prepend(&Arc::new(row.clone()), &Arc::new(seq.clone()), 100, cfg.budget))
        }
        Bundle::Sequence(p) => {
            let none = std::collections::BTreeSet::<Nat>::new();
            let halts = (0..cfg.stage.min(500)).all(|c| p.exec(&none, &Nat::from(c), &Budget::new(cfg.budget)).is_ok());
            report.push("decides", if halts { Verdict::Pass } else { Verdict::Inconclusive });
        }
    }
    Ok(report)
}

/// Directions accepted by [`transform`].
pub const DIRECTIONS: &[&str] = &["enum2comp", "interp2functor", "functor2interp", "prepend"];

/// Parameters `ā` used when reading an interpretation off a functor.
pub const INTERP_DIM: usize = 2;

pub fn transform(b: Bundle, direction: &str) -> Result<Bundle> {
    let mismatch = |expected: &str, b: &Bundle| Error::KindMismatch { expected: expected.into(), found: b.kind().into() };
    Ok(match direction {
        "enum2comp" => match b {
            Bundle::Functor(Functor::Enumerable(f)) => Bundle::Functor(Functor::Computable(enum_to_computable(&f).functor)),
            other => return Err(mismatch("functor", &other)),
        },
        "interp2functor" => match b {
            Bundle::Interpretation { structure, interp } => {
                Bundle::Functor(Functor::Enumerable(interp_to_functor(Arc::new(interp), &structure)))
            }
            other => return Err(mismatch("interpretation", &other)),
        },
        "functor2interp" => match b {
            Bundle::Functor(Functor::Enumerable(f)) => {
                Bundle::Interpretation { structure: f.source.clone(), interp: functor_to_interp(&f, INTERP_DIM).star }
            }
            other => return Err(mismatch("functor", &other)),
        },
        "prepend" => match b {
            Bundle::Prepend { row, seq } => Bundle::Sequence(prepend_computable(Arc::new(row), Arc::new(seq))),
            other => return Err(mismatch("prepend", &other)),
        },
        other => return Err(Error::UnknownName(other.into())),
    })
}

/// The bundle a built-in example is made from, where it has one.
pub fn example_bundle(name: &str) -> Result<Bundle> {
    Ok(match name {
        "identity-functor" => {
            Bundle::Functor(Functor::Enumerable(EnumerableFunctor::identity("pure-equality", Signature::empty())))
        }
        "complement-complete" => Bundle::Functor(Functor::Enumerable(EnumerableFunctor::complement("complete-graph"))),
        "complement-rado" | "bitransform-rado" => {
            Bundle::Functor(Functor::Enumerable(EnumerableFunctor::complement("rado")))
        }
        "pair-intersection-interp" => Bundle::Interpretation {
            structure: "pure-equality".into(),
            interp: EffectiveInterpretation::pair_intersection(),
        },
        "prepend-evens" => Bundle::Prepend { row: programs::evens(), seq: programs::divisible_rows() },
        other => return Err(Error::UnknownName(other.into())),
    })
}
