use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn regint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regint")).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

/// The single stderr line of a failed run.
fn error_line(out: &Output) -> Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(text.lines().count(), 1, "{text}");
    serde_json::from_str(text.trim()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn norm_examples() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", r#"{"rows":2,"cols":2,"entries":[[1,0],[-2,0],[3,0],[4,0]]}"#);
    let id = write(dir.path(), "id.json", r#"{"rows":2,"cols":2,"entries":[[1,0],[0,0],[0,0],[1,0]]}"#);
    for (file, p, expected) in [(&a, "1", 6.0), (&a, "inf", 7.0), (&id, "2", 1.0)] {
        let out = regint(&["norm", "--input", file, "--p", p]);
        assert!(out.status.success());
        let r = report(&out);
        assert_eq!(r["schema"], "regint-report/1");
        assert!((r["value"].as_f64().unwrap() - expected).abs() <= 1e-9, "{r}");
        assert_eq!(r["pass"], true);
    }
}

#[test]
fn interp_examples() {
    let out = regint(&["thm1", "--n", "3", "--trials", "50", "--theta", "0.5", "--seed", "7"]);
    assert!(out.status.success());
    let r = report(&out);
    assert_eq!(r["summary"]["instances"], 50);
    assert!(r["summary"]["worst_gap"].as_f64().unwrap() <= 1e-4);

    let out = regint(&["interp", "--n", "1", "--trials", "5"]);
    assert!(out.status.success());
    let r = report(&out);
    assert!(r["summary"]["worst_gap"].as_f64().unwrap() <= 1e-12);

    let out = regint(&["interp", "--n", "3", "--theta", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["error"], "usage");
}

#[test]
fn gen_examples() {
    let dir = tempfile::tempdir().unwrap();
    let first = regint(&["gen", "--kind", "matrix", "--n", "3", "--seed", "1"]);
    let second = regint(&["gen", "--kind", "matrix", "--n", "3", "--seed", "1"]);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let other = regint(&["gen", "--kind", "matrix", "--n", "3", "--seed", "2"]);
    assert_ne!(first.stdout, other.stdout);

    let path = dir.path().join("p.json");
    let out = regint(&["gen", "--kind", "extprob", "--n", "4", "--k", "2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let prob = regint_core::io::read_extension_problem(&path).unwrap();
    assert_eq!((prob.ambient_n(), prob.dim()), (4, 2));

    let out = regint(&["gen", "--kind", "matrix", "--n", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["error"], "usage");

    let out = regint(&["gen", "--kind", "extprob", "--n", "2", "--k", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_line(&out)["error"], "domain");

    let out = regint(&["gen", "--kind", "matrix", "--n", "2", "--nonneg"]);
    let m = regint_core::io::parse_matrix(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert!(m.is_nonneg_real());
}

#[test]
fn extend_zero_fill() {
    let dir = tempfile::tempdir().unwrap();
    let prob = write(
        dir.path(),
        "s.json",
        r#"{"p":3,"ambient_n":2,"target_m":2,"basis":[[[1,0],[0,0]]],"images":[[[1,0],[-2,0]]]}"#,
    );
    let out = regint(&["extend", "--input", &prob]);
    assert!(out.status.success());
    let r = report(&out);
    let expected = 9f64.powf(1.0 / 3.0);
    assert!((r["min"].as_f64().unwrap() - expected).abs() <= 1e-9, "{r}");
    assert!(r["gap"].as_f64().unwrap() <= 1e-6);
    assert_eq!(r["pass"], true);

    let out = regint(&["extend", "--input", &prob, "--p", "inf"]);
    assert!((report(&out)["min"].as_f64().unwrap() - 2.0).abs() <= 1e-12);

    let out = regint(&["extend", "--input", &prob, "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hardy_identity_table() {
    let out = regint(&["hardy", "--degree", "1", "--trials", "2", "--kind", "identity", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema: regint-report/1"));
    assert_eq!(lines.next(), Some("trial,r_p,r_inf,r_1,interpolated_bound,ratio"));
    for line in lines {
        let ratio: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((ratio - 1.0).abs() <= 1e-6, "{line}");
    }

    let out = regint(&["hardy", "--degree", "4", "--n", "4"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_line(&out)["error"], "domain");
}

#[test]
fn input_errors_are_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let out = regint(&["norm", "--input", missing.to_str().unwrap(), "--p", "2"]);
    assert_eq!(out.status.code(), Some(3));
    let e = error_line(&out);
    assert_eq!(e["error"], "io");
    assert!(e["message"].as_str().unwrap().contains("missing.json"));

    let bad = write(dir.path(), "bad.json", r#"{"rows":2,"cols":2,"entries":[[1,0],[2,0],[3,0]]}"#);
    let out = regint(&["norm", "--input", &bad, "--p", "2"]);
    assert_eq!(error_line(&out)["error"], "structure");
}
