//! End-to-end checks of the `cclab` binary: exit codes, report formats,
//! byte stability.

use std::process::{Command, Output};

fn cclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cclab"))
        .args(args)
        .env_remove("CCLAB_SEED")
        .env_remove("CCLAB_TOL")
        .output()
        .expect("spawn cclab")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn missing_required_arg_exits_2() {
    let out = cclab(&["pj", "sample", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_2() {
    let out = cclab(&["gt", "sweep", "--bogus", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn seed_comes_from_environment_when_flag_absent() {
    let out = Command::new(env!("CARGO_BIN_EXE_cclab"))
        .args(["pj", "sample", "--k", "2", "--n", "1"])
        .env("CCLAB_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn sweep_csv_schema_and_row_count() {
    let out = cclab(&[
        "gt", "sweep", "--n", "64", "--budgets", "2:4", "--trials", "20", "--seed", "1",
        "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.trim_end().lines().collect();
    assert_eq!(lines.len(), 4, "header + 3 rows");
    assert_eq!(
        lines[0],
        "n,b,trials,alice_bits_mean,alice_bits_max,bob_bits_mean,bob_bits_max,rounds_mean,error_rate,seed"
    );
}

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    let args = ["verify", "lemmas", "--which", "decoupling", "--trials", "5", "--seed", "3"];
    assert_eq!(stdout(&cclab(&args)), stdout(&cclab(&args)));
    let sweep = ["gt", "sweep", "--n", "32", "--budgets", "2:3", "--trials", "10", "--seed", "5"];
    assert_eq!(stdout(&cclab(&sweep)), stdout(&cclab(&sweep)));
}

#[test]
fn csv_format_on_verification_payload_exits_2() {
    let out = cclab(&[
        "verify", "lemmas", "--which", "shearer", "--trials", "5", "--seed", "1",
        "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_check_exits_1_but_still_writes_report() {
    // An impossible tolerance forces pass=false without a real violation.
    let out = cclab(&[
        "verify", "lemmas", "--which", "shearer", "--trials", "5", "--seed", "1",
        "--tol=-1.0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(false));
    assert_eq!(report["payload"][0]["lemma"], "shearer");
}

#[test]
fn info_check_constant_message_has_zero_information() {
    let out = cclab(&["gt", "info-check", "--n", "4", "--message", "zero"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let lhs = report["payload"]["lhs"].as_f64().unwrap();
    assert!(lhs.abs() < 1e-12, "lhs {lhs}");
}

#[test]
fn info_check_random_message_requires_seed() {
    let out = cclab(&["gt", "info-check", "--n", "4", "--message", "random:2"]);
    assert_eq!(out.status.code(), Some(2));
    let ok = cclab(&["gt", "info-check", "--n", "4", "--message", "random:2", "--seed", "1"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn bad_budget_range_exits_2() {
    for bad in ["5:2", "2", "a:b"] {
        let out = cclab(&[
            "gt", "sweep", "--n", "32", "--budgets", bad, "--trials", "5", "--seed", "1",
        ]);
        assert_eq!(out.status.code(), Some(2), "budgets {bad}");
    }
}

#[test]
fn verify_qmath_reports_every_fact() {
    let out = cclab(&["verify", "qmath", "--trials", "5", "--seed", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["payload"].as_array().unwrap().len(), 9);
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
}
