//! End-to-end tests of the binary: exit codes, report schemas, and
//! determinism of repeated runs.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jetmatch"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn circle_json() -> &'static str {
    r#"{"kind":"circle","params":{"r":1.0}}"#
}

fn line_json() -> &'static str {
    r#"{"kind":"line","params":{"a":[1.0,0.0],"b":[0.0,0.0],"profile":{"type":"linear","v":1.0}}}"#
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("jetmatch_cli_tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn identical_curves_distance_is_zero() {
    let out = run(&[
        "distance",
        "--curve1",
        circle_json(),
        "--curve2",
        circle_json(),
        "--grid",
        "64",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert!(v["value"].as_f64().unwrap() <= 1e-10);
    assert_eq!(v["method"], "agree");
}

#[test]
fn missing_file_exits_one() {
    let out = run(&[
        "distance",
        "--curve1",
        "/no/such/file.json",
        "--curve2",
        circle_json(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn zero_lambda_is_rejected_with_message() {
    let out = run(&["check", "--lambda", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lambda_1"), "stderr: {err}");
}

#[test]
fn mismatched_weights_exit_one() {
    let out = run(&[
        "distance",
        "--curve1",
        line_json(),
        "--curve2",
        circle_json(),
        "--k",
        "2",
        "--lambda",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn theta_csv_is_written() {
    let path = scratch("theta.csv");
    let out = run(&[
        "distance",
        "--curve1",
        line_json(),
        "--curve2",
        circle_json(),
        "--grid",
        "64",
        "--theta-csv",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,theta"));
    assert_eq!(lines.count(), 65);
}

#[test]
fn sweep_emits_one_row_per_lambda_and_is_deterministic() {
    let args = [
        "sweep",
        "--curve1",
        line_json(),
        "--curve2",
        circle_json(),
        "--lambda-min",
        "1",
        "--lambda-max",
        "3",
        "--steps",
        "5",
        "--grid",
        "32",
    ];
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "lambda,energy_best,winding,branch_count");
    assert_eq!(lines.len(), 6);
    // byte-identical rerun
    let again = run(&args);
    assert_eq!(text, String::from_utf8(again.stdout).unwrap());
}

#[test]
fn solve_bvp_lists_critical_points() {
    let out = run(&[
        "solve-bvp",
        "--curve1",
        line_json(),
        "--curve2",
        circle_json(),
        "--grid",
        "64",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    let points = v["critical_points"].as_array().unwrap();
    assert!(!points.is_empty());
    assert!(points[0]["residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn distance_reports_are_byte_identical_across_runs() {
    let args = [
        "distance",
        "--curve1",
        line_json(),
        "--curve2",
        circle_json(),
        "--grid",
        "64",
        "--json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn csv_curves_round_through_the_cli() {
    let path = scratch("line.csv");
    let mut csv = String::from("s,x1,x2\n");
    for m in 0..=100 {
        let s = m as f64 / 100.0;
        csv.push_str(&format!("{s:.16e},{s:.16e},0.0\n"));
    }
    std::fs::write(&path, csv).unwrap();
    let out = run(&[
        "distance",
        "--curve1",
        path.to_str().unwrap(),
        "--curve2",
        line_json(),
        "--grid",
        "50",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // the sampled line is the analytic line up to finite-difference error
    assert!(v["value"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn sweep_of_identical_curves_is_all_zeros() {
    let out = run(&[
        "sweep",
        "--curve1",
        circle_json(),
        "--curve2",
        circle_json(),
        "--lambda-min",
        "1",
        "--lambda-max",
        "2",
        "--steps",
        "3",
        "--grid",
        "32",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let energy: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(energy.abs() <= 1e-10, "row {line}");
    }
}

#[test]
fn check_passes_with_default_seed() {
    let out = run(&["check", "--seed", "0"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "stdout:\n{text}");
    assert!(text.contains("diamond antisymmetry"));
    assert!(text.contains("PASS"));
    assert!(!text.contains("FAIL"));
}
