//! End-to-end checks of the `reticent` binary: exit codes, determinism, and
//! the bundled example reproductions.

use std::process::{Command, Output};

fn reticent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reticent"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn reproduce_matches_all_bundled_examples() {
    for example in ["1", "2", "3"] {
        let out = reticent(&["reproduce", example]);
        assert!(out.status.success(), "example {}", example);
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains("all figures match"), "{}", text);
    }
}

#[test]
fn verify_exit_code_tracks_the_verdict() {
    let failing = reticent(&[
        "verify",
        "--scenario",
        "correlated",
        "--family-k",
        "4",
        "--seed",
        "7",
        "--properties",
        "dominant-iic",
    ]);
    assert_eq!(failing.status.code(), Some(1));
    assert!(String::from_utf8(failing.stdout).unwrap().contains("FAIL"));

    let passing = reticent(&[
        "verify",
        "--scenario",
        "correlated",
        "--regulated",
        "--family-k",
        "4",
        "--seed",
        "7",
        "--properties",
        "dominant-iic",
    ]);
    assert_eq!(passing.status.code(), Some(0));
}

#[test]
fn verify_json_is_deterministic() {
    let args = [
        "verify",
        "--scenario",
        "elicitation",
        "--family-k",
        "8",
        "--seed",
        "3",
        "--format",
        "json",
    ];
    let a = reticent(&args);
    let b = reticent(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn run_reports_the_silence_utilities() {
    let out = reticent(&[
        "run",
        "--scenario",
        "silence",
        "--strategy",
        "1=no-info",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let u = report["expected_utilities"][0].as_f64().unwrap();
    assert!((u - 0.4).abs() < 1e-9);
}

#[test]
fn export_emits_the_documented_columns() {
    let out = reticent(&["export-virtual-values", "--scenario", "elicitation"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("bidder,type,profile,value,phi,phi_ironed\n"));
    assert!(text.lines().count() > 1);
}

#[test]
fn bad_inputs_fail_with_context() {
    let out = reticent(&["run", "--scenario", "silence", "--mechanism", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    let out = reticent(&["run", "--scenario", "silence", "--mask", "9"]);
    assert_eq!(out.status.code(), Some(2));
    let out = reticent(&["reproduce", "4"]);
    assert_eq!(out.status.code(), Some(2));
}
