//! End-to-end checks of the command-line surface: subcommands, manifest
//! loading, exit codes and byte-level report determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tetradlab"))
}

fn manifests_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .join("manifests")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn list_suites_and_builtins() {
    let out = run(&["list-suites"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["suite.geometry", "suite.counterexample", "suite.lagrangian"] {
        assert!(text.contains(name), "missing {} in:\n{}", name, text);
    }
    let out = run(&["list-builtins"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "builtin:minkowski",
        "builtin:s2",
        "builtin:schwarzschild",
        "builtin:flrw-dust",
    ] {
        assert!(text.contains(name), "missing {} in:\n{}", name, text);
    }
}

#[test]
fn check_passes_on_a_builtin_and_is_byte_deterministic() {
    let args = ["check", "builtin:s2", "--points", "8", "--seed", "3"];
    let first = run(&args);
    assert!(
        first.status.success(),
        "suite failed:\n{}",
        String::from_utf8_lossy(&first.stdout)
    );
    let second = run(&args);
    assert_eq!(
        first.stdout, second.stdout,
        "reports must be byte-identical"
    );
    // every line has the seven tab-separated report columns
    let text = String::from_utf8(first.stdout).unwrap();
    for line in text.lines() {
        assert_eq!(line.split('\t').count(), 7, "malformed row: {}", line);
    }
    // expected-fail diagnostics are lower-bound rows that PASS
    assert!(text.contains("eq49E-expected-fail"));
    let row = text
        .lines()
        .find(|l| l.contains("eq49E-expected-fail"))
        .unwrap();
    assert!(row.contains("PASS") && row.contains(">"), "row: {}", row);
}

#[test]
fn json_mode_emits_the_same_fields() {
    let out = run(&["check", "builtin:minkowski", "--points", "4", "--json"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["manifold"], "minkowski");
    assert_eq!(parsed["pass"], true);
    let rows = parsed["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    for key in [
        "suite",
        "check",
        "manifold",
        "max_residual",
        "tolerance",
        "pass",
        "worst_point",
    ] {
        assert!(rows[0].get(key).is_some(), "missing field {}", key);
    }
}

#[test]
fn manifest_files_load_and_pass() {
    for name in [
        "s2.mf",
        "round-sphere-coframe.mf",
        "curved-metric.mf",
        "columbus-s2.mf",
    ] {
        let path = manifests_dir().join(name);
        let out = run(&["check", path.to_str().unwrap()]);
        assert!(
            out.status.success(),
            "{} failed:\n{}\n{}",
            name,
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn exit_codes_distinguish_failure_from_usage_errors() {
    // a crushing tolerance scale turns machine-noise residuals into failures: exit 1
    let out = run(&[
        "check",
        "builtin:s2",
        "--points",
        "4",
        "--tol-scale",
        "1e-12",
    ]);
    assert_eq!(out.status.code(), Some(1));
    // unknown suite: exit 2
    let out = run(&["check", "builtin:s2", "--suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
    // missing manifest file: exit 2
    let out = run(&["check", "/nonexistent/path.mf"]);
    assert_eq!(out.status.code(), Some(2));
    // unknown builtin: exit 2
    let out = run(&["check", "builtin:torus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_applies_operators_to_multivector_literals() {
    // Ricci operator on theta^0 over the unit sphere: the operator-layer
    // Ricci 1-form, -theta^0
    let out = run(&[
        "eval",
        "builtin:s2",
        "--expr",
        "e(0)",
        "--op",
        "ricci",
        "--at",
        "0.7853981633974483,1.0",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.starts_with("e(0)")).expect(&text);
    let value: f64 = line.split('\t').nth(1).unwrap().parse().unwrap();
    assert!(
        (value + 1.0).abs() < 1e-9,
        "ricci theta^0 component {}",
        value
    );

    // d of a scalar: d(x1^2) = 2 x1 dx1 = 2 x1 theta^0 at unit radius
    let out = run(&[
        "eval",
        "builtin:s2",
        "--expr",
        "x1^2 + 2*e(0,1)",
        "--op",
        "d",
        "--at",
        "0.7853981633974483,1.0",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.starts_with("e(0)")).expect(&text);
    let value: f64 = line.split('\t').nth(1).unwrap().parse().unwrap();
    assert!(
        (value - 2.0 * std::f64::consts::FRAC_PI_4).abs() < 1e-12,
        "d(x1^2) component {}",
        value
    );
}

#[test]
fn seed_env_variable_is_honored() {
    let with_flag = run(&["check", "builtin:minkowski", "--points", "4", "--seed", "9"]);
    let with_env = bin()
        .args(["check", "builtin:minkowski", "--points", "4"])
        .env("TETRADLAB_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(with_flag.stdout, with_env.stdout);
}

#[test]
fn wrong_minus_mode_adds_the_diagnostic_rows() {
    let out = run(&["check", "builtin:s2", "--points", "8", "--wrong-minus"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("wrong-minus-torsion-deviation"), "{}", text);
}

#[test]
fn values_are_shareable_across_concurrent_evaluators() {
    use std::sync::Arc;
    use tetradlab::manifold::builtin;

    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<tetradlab::symexpr::ScalarField>();
    assert_send_sync::<tetradlab::clifford::Multivector>();
    assert_send_sync::<tetradlab::manifold::Manifold>();

    let m = Arc::new(builtin("s2", None).unwrap());
    let handles: Vec<_> = (0..4)
        .map(|k| {
            let m = m.clone();
            std::thread::spawn(move || {
                let p = vec![0.5 + 0.1 * k as f64, 1.0];
                m.curv.scalar.eval(&p).unwrap()
            })
        })
        .collect();
    for h in handles {
        let v = h.join().unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }
}
