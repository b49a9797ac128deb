use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn rigidity(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rigidity"))
        .args(args)
        .env("RIGIDITY_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rigidity-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn su2_run_converges_and_writes_artifacts() {
    let dir = scratch("su2");
    let out = rigidity(&["run", "--instance", "liealg-su2", "--perturb", "0.1", "--seed", "3"], &dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap();
    assert!(report["final_residual"].as_f64().unwrap() <= 1e-10);
    let ledger = std::fs::read_to_string(dir.join("ledger.csv")).unwrap();
    assert!(ledger.lines().count() >= 2);
    let map: Value = serde_json::from_slice(&std::fs::read(dir.join("map.json")).unwrap()).unwrap();
    assert_eq!(map["matrix"].as_array().unwrap().len(), 3);
}

#[test]
fn unperturbed_darboux_run_is_trivial() {
    let dir = scratch("darboux0");
    let out = rigidity(&["run", "--instance", "darboux", "--amp", "0", "--grid", "33"], &dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["steps"], 0);
}

#[test]
fn out_flag_beats_environment() {
    let env_dir = scratch("env");
    let flag_dir = scratch("flag");
    let out = rigidity(&["check", "schedule", "--out", flag_dir.to_str().unwrap()], &env_dir);
    assert_eq!(out.status.code(), Some(0));
    assert!(flag_dir.join("schedule.csv").exists());
    assert!(!env_dir.join("schedule.csv").exists());
}

#[test]
fn malformed_config_exits_2() {
    let dir = scratch("badcfg");
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, "t0 = \"two\"\n").unwrap();
    let out = rigidity(&["run", "--config", cfg.to_str().unwrap()], &dir);
    assert_eq!(out.status.code(), Some(2));
    let out = rigidity(&["run", "--instance", "liealg-e8"], &dir);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn toml_config_is_overlaid_by_flags() {
    let dir = scratch("toml");
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, "instance = \"liealg-sl2\"\nperturb = 0.05\nseed = 7\n").unwrap();
    let out = rigidity(&["run", "--config", cfg.to_str().unwrap(), "--instance", "liealg-su2"], &dir);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["instance"], "liealg-su2");
}

#[test]
fn non_rigid_algebra_fails_with_1() {
    let dir = scratch("heis");
    let out = rigidity(&["run", "--instance", "liealg-heisenberg"], &dir);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("H^2"));
}

#[test]
fn check_dolbeault_one_variable() {
    let dir = scratch("dolb");
    let out = rigidity(&["check", "dolbeault", "--n", "1", "--format", "json"], &dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["passed"], true);
    assert!(dir.join("dolbeault.csv").exists());
}

#[test]
fn check_smoothing_with_scales() {
    let dir = scratch("smooth");
    let out = rigidity(&["check", "smoothing", "--t", "2,4,8,16", "--corpus", "20"], &dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.lines().count() > 1);
}

#[test]
fn empty_corpus_and_unknown_suite_exit_2() {
    let dir = scratch("empty");
    assert_eq!(rigidity(&["check", "smoothing", "--corpus", "0"], &dir).status.code(), Some(2));
    assert_eq!(rigidity(&["check", "nonsense"], &dir).status.code(), Some(2));
}

fn classify(name: &str, system: &str) -> Output {
    let dir = scratch(name);
    let path = dir.join("system.json");
    std::fs::write(&path, system).unwrap();
    rigidity(&["classify", path.to_str().unwrap()], &dir)
}

#[test]
fn classify_elliptic_and_focus_focus() {
    let out = classify("ell", r#"{"mu":[[[[2,0],1,1],[[0,2],1,1]]]}"#);
    assert_eq!(out.status.code(), Some(0));
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["type"], serde_json::json!([1, 0, 0]));

    let ff = r#"{"mu":[[[[1,0,1,0],1,1],[[0,1,0,1],1,1]],[[[1,0,0,1],1,1],[[0,1,1,0],-1,1]]]}"#;
    let out = classify("ff", ff);
    assert_eq!(out.status.code(), Some(0));
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["type"], serde_json::json!([0, 0, 1]));
}

#[test]
fn classify_rejects_degenerate_and_garbage() {
    let out = classify("deg", r#"{"mu":[[[[3,0],1,1],[[0,3],1,1]]]}"#);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension"));
    assert_eq!(classify("junk", "nope").status.code(), Some(2));
}

#[test]
fn sweep_writes_one_row_per_job() {
    let dir = scratch("sweep");
    let out = rigidity(&["sweep", "--instance", "liealg-su2", "--seeds", "1-3", "--sizes", "0.05,0.1"], &dir);
    assert_eq!(out.status.code(), Some(0));
    let table = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 7);
    assert!(table.lines().skip(1).all(|l| l.contains(",true,")));
}
