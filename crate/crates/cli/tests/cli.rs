use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sdesym_core::{CaseReport, CheckReport, TransferRecord};
use serde_json::Value;

fn sdesym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdesym")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn export(dir: &Path, case: &str) -> PathBuf {
    let path = dir.join(format!("{case}.json"));
    let o = sdesym(&["export", case, "-o", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    path
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let gbm = export(dir.path(), "gbm");
    let f = gbm.to_str().unwrap();
    assert_eq!(code(&sdesym(&["check", f, "-c", "kbe:Y1", "-c", "sde:X2"])), 0);
    let bad = sdesym(&["check", f, "-c", "kbe:Y1-flipped"]);
    assert_eq!(code(&bad), 1);
    assert!(stdout(&bad).contains("[FAIL] kbe Y1-flipped"), "{}", stdout(&bad));
    // The file lists failing candidates too.
    assert_eq!(code(&sdesym(&["check", f])), 1);
    assert_eq!(code(&sdesym(&["check", f, "-c", "nosuch"])), 2);
    assert_eq!(code(&sdesym(&["check", f, "--points", "0"])), 2);
    assert_eq!(code(&sdesym(&["check", "/nonexistent/file.json"])), 2);
    assert_eq!(code(&sdesym(&["check", f, "--mode", "sideways"])), 2);

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"states\": [\"x\"], \"drift\": [\"x +\"]}").unwrap();
    let o = sdesym(&["check", broken.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!o.stderr.is_empty());
}

#[test]
fn json_check_report_roundtrips() {
    let dir = tempfile::tempdir().unwrap();
    let heat = export(dir.path(), "heat");
    let o = sdesym(&["--format", "json", "check", heat.to_str().unwrap(), "-c", "sde:x*d_x", "-c", "kbe:Y2"]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], Value::Bool(false));
    let reports: Vec<CheckReport> = serde_json::from_value(v["reports"].clone()).unwrap();
    assert_eq!(reports.len(), 2);
    assert!(!reports[0].passed() && reports[1].passed());
    assert!(!reports[0].witnesses().is_empty());
    let again = serde_json::to_value(&reports).unwrap();
    assert_eq!(again, v["reports"]);
}

#[test]
fn map_and_bracket() {
    let dir = tempfile::tempdir().unwrap();
    let gbm = export(dir.path(), "gbm");
    let f = gbm.to_str().unwrap();
    let o = sdesym(&["--format", "json", "map", f, "sde:X2", "sde->kfe"]);
    assert_eq!(code(&o), 0);
    let rec: TransferRecord = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(rec.target_report.passed());

    let o = sdesym(&["--format", "json", "map", f, "kbe:Y1-flipped", "kbe->kfe"]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["refused"], Value::Bool(true));

    assert_eq!(code(&sdesym(&["map", f, "sde:X2", "sideways"])), 2);

    let o = sdesym(&["--format", "json", "bracket", f, "sde:X1", "sde:X2"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["span"]["result"], "in_span");
    assert_eq!(v["span"]["certified"], Value::Bool(true));
}

#[test]
fn catalog_commands() {
    let o = sdesym(&["catalog", "--list"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 7);
    assert_eq!(code(&sdesym(&["catalog", "nosuch"])), 2);

    let o = sdesym(&["--format", "json", "catalog", "heat"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cases: Vec<CaseReport> = serde_json::from_value(v["cases"].clone()).unwrap();
    assert_eq!(cases.len(), 1);
    assert!(cases[0].all_matched());

    let o = sdesym(&["catalog"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).trim_end().ends_with("7/7 cases matched"));
}

#[test]
fn export_subcase_to_stdout() {
    let o = sdesym(&["export", "driftAx", "--subcase", "A=1"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["drift"][0], "1/x");
    assert_eq!(code(&sdesym(&["export", "driftAx", "--subcase", "A=7"])), 2);
}
