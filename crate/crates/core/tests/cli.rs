use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const DISK: &str = r#"{"type":"ball","dim":2,"radius":1}"#;

/// Runs the binary from a scratch directory so default outputs land there.
fn billiard(args: &[&str]) -> Output {
    let cwd = tempfile::tempdir().unwrap();
    Command::new(env!("CARGO_BIN_EXE_billiard"))
        .args(args)
        .current_dir(cwd.path())
        .env_remove("BILLIARD_OUT")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = billiard(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

fn path(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

#[test]
fn run_writes_one_row_per_record() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["--body-json", DISK, "--seed", "3", "--out", path(dir.path()), "run", "--steps", "1000"]);
    let table = rows(&dir.path().join("trajectory.csv"));
    assert_eq!(table.len(), 1000);
    assert_eq!(table[0][1], "1001");
    for name in ["state.json", "manifest.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "run");
    assert_eq!(manifest["seed"], 3);
}

#[test]
fn spectral_eigs_start_with_the_circle_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["--body-json", DISK, "--out", path(dir.path()), "spectral", "--bins", "256"]);
    let table = rows(&dir.path().join("eigs.csv"));
    assert_eq!(table.len(), 256);
    let lambda: f64 = table[1][1].parse().unwrap();
    assert!((lambda + 1.0 / 3.0).abs() < 1e-3, "{lambda}");
    assert!(dir.path().join("sweep.csv").exists());
    assert!(!dir.path().join("matrix.csv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        ok(&["--body-json", DISK, "--seed", "9", "--out", path(dir.path()), "run", "--steps", "500", "--replicas", "3"]);
        ok(&["--body-json", DISK, "--seed", "9", "--out", path(dir.path()), "f-quantile", "--samples", "20000"]);
    }
    for name in ["trajectory.csv", "state.json", "fquant.csv"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn exit_codes_distinguish_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = billiard(&["--body", "/nonexistent/body.json", "run", "--steps", "3"]);
    assert_eq!(missing.status.code(), Some(2));
    assert_eq!(billiard(&["frobnicate"]).status.code(), Some(2));
    let bad = billiard(&["--body-json", r#"{"type":"ball","dim":2,"radius":-1}"#, "run", "--steps", "3"]);
    assert_eq!(bad.status.code(), Some(2));
    let region = billiard(&["--body-json", DISK, "--out", path(dir.path()), "fraction", "--steps", "10", "--region", "x0<1"]);
    assert_eq!(region.status.code(), Some(2));
}

#[test]
fn validate_reports_body_constants() {
    let text = ok(&["--body-json", r#"{"type":"capsule","dim":8,"half_length":4,"radius":1}"#, "validate"]);
    assert!(text.contains("C = 1\n"), "{text}");
    assert!(text.contains("D = 10\n"), "{text}");
    let text = ok(&["--body-json", r#"{"type":"ellipsoid","dim":3,"semi_axes":[2,1,1]}"#, "validate"]);
    assert!(text.contains("C = 2\n"), "{text}");
    assert!(text.contains("D = 4\n"), "{text}");
}

#[test]
fn output_directory_defaults_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_billiard"))
        .args(["--body-json", DISK, "fraction", "--steps", "2000", "--region", "x2>0"])
        .current_dir(cwd.path())
        .env("BILLIARD_OUT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = rows(&dir.path().join("fraction.csv"));
    assert_eq!(table.len(), 1);
    assert!(fs::read_dir(cwd.path()).unwrap().next().is_none());
}

#[test]
fn json_format_writes_arrays_of_objects() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["--body-json", DISK, "--format", "json", "--out", path(dir.path()), "spectral", "--bins", "32"]);
    let eigs: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("eigs.json")).unwrap()).unwrap();
    let eigs = eigs.as_array().unwrap();
    assert_eq!(eigs.len(), 32);
    assert_eq!(eigs[0]["k"], 0);
    assert!((eigs[0]["lambda_k"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}
