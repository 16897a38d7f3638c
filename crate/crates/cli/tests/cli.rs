use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use enumfunctor::examples::{example_bundle, EXAMPLES};
use enumfunctor::formats::{parse_bundle, write_bundle};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_enumfunctor"))
        .args(args)
        .env_remove("ENUMFUNCTOR_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn summary_count(text: &str, label: &str) -> usize {
    let line = text.lines().find(|l| l.starts_with("SUMMARY")).expect("summary line");
    let field = line.split_whitespace().find_map(|f| f.strip_prefix(&format!("{label}="))).unwrap();
    field.parse().unwrap()
}

fn export(dir: &Path, name: &str) -> String {
    let path = dir.join(format!("{name}.txt"));
    fs::write(&path, write_bundle(&example_bundle(name).unwrap())).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn listing() {
    for args in [&[][..], &["list"][..]] {
        let o = cli(args);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        for e in EXAMPLES {
            assert!(text.contains(e.name), "{} missing", e.name);
        }
        assert_eq!(text, stdout(&cli(args)));
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cli(&["verify", "no-such-example"]).status.code(), Some(2));
    assert_eq!(cli(&["verify", "identity-functor", "--prefix", "0"]).status.code(), Some(2));
}

#[test]
fn complement_rado_passes() {
    let o = cli(&["verify", "complement-rado", "--prefix", "12", "--stage", "800"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(summary_count(&stdout(&o), "fail"), 0);
}

#[test]
fn complement_rado_is_byte_identical_across_runs() {
    let a = cli(&["verify", "complement-rado"]);
    let b = cli(&["verify", "complement-rado"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn identity_has_nothing_inconclusive() {
    let o = cli(&["verify", "identity-functor"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(summary_count(&stdout(&o), "inconclusive"), 0);
}

#[test]
fn tiny_budget_stays_green_unless_strict() {
    let o = cli(&["verify", "complement-rado", "--budget", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(summary_count(&stdout(&o), "inconclusive") > 0);
    assert_eq!(cli(&["verify", "complement-rado", "--budget", "1", "--strict"]).status.code(), Some(1));
}

#[test]
fn negative_controls_exit_1() {
    for name in ["broken-star", "broken-sim"] {
        let o = cli(&["verify", name]);
        assert_eq!(o.status.code(), Some(1));
        assert!(stdout(&o).lines().any(|l| l.contains(" fail witness=")));
    }
}

#[test]
fn structured_output_is_json() {
    let o = cli(&["verify", "prepend-evens", "--format", "structured"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.is_object());
}

#[test]
fn functor_to_interpretation_reparses_and_repeats() {
    let dir = tempfile::tempdir().unwrap();
    let input = export(dir.path(), "complement-rado");
    let out1 = dir.path().join("one.txt");
    let out2 = dir.path().join("two.txt");
    for out in [&out1, &out2] {
        let o = cli(&["transform", &input, "--to", "functor2interp", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = fs::read_to_string(&out1).unwrap();
    assert_eq!(text, fs::read_to_string(&out2).unwrap());
    assert_eq!(parse_bundle("one", &text).unwrap().kind(), "interpretation");
}

#[test]
fn interpretation_to_functor_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let input = export(dir.path(), "pair-intersection-interp");
    let out = dir.path().join("functor.txt");
    let out = out.to_str().unwrap();
    assert_eq!(cli(&["transform", &input, "--to", "interp2functor", "--out", out]).status.code(), Some(0));
    let o = cli(&["verify", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn kind_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = export(dir.path(), "prepend-evens");
    let out = dir.path().join("x.txt");
    let o = cli(&["transform", &input, "--to", "functor2interp", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn config_file_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("pinned.cfg");
    fs::write(&cfg, "budget = 1\naxiom-budget = 1\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_enumfunctor"))
        .args(["verify", "complement-rado", "--strict"])
        .env("ENUMFUNCTOR_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1), "pinned budget should leave checks inconclusive");
    // flags override the file
    let o = Command::new(env!("CARGO_BIN_EXE_enumfunctor"))
        .args(["verify", "prepend-evens", "--strict", "--budget", "200000"])
        .env("ENUMFUNCTOR_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn bad_config_names_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "stage = 10\nprefix = lots\n").unwrap();
    let o = cli(&["--config", cfg.to_str().unwrap(), "list"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.cfg:2"));
}
