use std::path::Path;
use std::process::{Command, Output};

use cqtf::run::{Manifest, RunConfig};
use serde_json::Value;

fn cqtf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqtf")).args(args).output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn out_arg(dir: &Path) -> String {
    dir.to_string_lossy().into_owned()
}

#[test]
fn tf_table_for_the_harmonic_trap() {
    let dir = tempfile::tempdir().unwrap();
    let out = cqtf(&["tf", "--d", "1", "--p", "2", "--C0", "1", "--out", &out_arg(dir.path())]);
    assert!(out.status.success());
    let table = json(&dir.path().join("tf.json"));
    let mu = table["mu_tf"].as_f64().unwrap();
    assert!((mu - 0.636_619_772_367_581_3).abs() < 1e-12);
    let limit = table["limit_constant"].as_f64().unwrap();
    assert!((limit - 0.159_154_943_091_895_3).abs() < 1e-12);
}

#[test]
fn solve_writes_a_unit_mass_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = cqtf(&["solve", "--N", "1e3", "--grid-n", "512", "--out", &out_arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let state = json(&dir.path().join("ground_state.json"));
    assert!((state["mass"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    let csv = std::fs::read_to_string(dir.path().join("field.csv")).unwrap();
    assert_eq!(csv.lines().count(), 513);
}

#[test]
fn invalid_configurations_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = out_arg(dir.path());
    for args in [
        vec!["solve", "--out", &o],
        vec!["solve", "--N", "-5", "--out", &o],
        vec!["solve", "--N", "1e3", "--kappa", "2", "--out", &o],
        vec!["sweep", "--Ns", "1e4,1e3", "--out", &o],
        vec!["tf", "--p", "-1", "--out", &o],
    ] {
        let out = cqtf(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn non_convergence_keeps_the_partial_state() {
    let dir = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "command": "solve",
        "potential": {"kind": "PurePower", "C0": 1.0, "p": 2.0},
        "solver": {"max_iter": 5, "grid": {"d": 1, "n": 256}},
        "N": 1e4,
        "output_dir": dir.path(),
    });
    let path = dir.path().join("config.json");
    std::fs::write(&path, config.to_string()).unwrap();
    let out = cqtf(&["solve", "--config", &path.to_string_lossy()]);
    assert_eq!(out.status.code(), Some(3));
    let state = json(&dir.path().join("ground_state.json"));
    assert_eq!(state["iterations"].as_u64(), Some(5));
    assert!(dir.path().join("field.csv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = cqtf(&["sweep", "--Ns", "1e3,1e4", "--grid-n", "256", "--out", &out_arg(dir.path())]);
        assert!(out.status.success());
    }
    for name in ["ground_state_000.json", "field_001.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = cqtf(&[
        "sweep", "--Ns", "1e3,1e4", "--grid-n", "256", "--kappa", "-1", "--out", &out_arg(dir.path()),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    let manifest: Manifest = serde_json::from_str(&text).unwrap();
    assert_eq!(manifest.files.len(), 4);
    let config: &RunConfig = &manifest.config;
    assert_eq!(config.ns, vec![1e3, 1e4]);
    assert_eq!(config.solver.grid.n, 256);
    assert_eq!(config.solver.kappa.value(), -1.0);

    let again = tempfile::tempdir().unwrap();
    let mut rerun = config.clone();
    rerun.output_dir = again.path().to_path_buf();
    let path = again.path().join("config.json");
    std::fs::write(&path, serde_json::to_string(&rerun).unwrap()).unwrap();
    assert!(cqtf(&["sweep", "--config", &path.to_string_lossy()]).status.success());
    assert_eq!(
        std::fs::read(dir.path().join("field_001.csv")).unwrap(),
        std::fs::read(again.path().join("field_001.csv")).unwrap()
    );
}

#[test]
fn verify_passes_on_the_reference_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = cqtf(&[
        "verify", "--d", "1", "--p", "2", "--C0", "1", "--Ns", "1e3,1e4,1e5", "--out", &out_arg(dir.path()),
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(!stdout.contains("FAIL"));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["passed"], Value::Bool(true));
    assert_eq!(report["report"]["rows"].as_array().unwrap().len(), 3);
    assert!(dir.path().join("report.csv").exists());
}
