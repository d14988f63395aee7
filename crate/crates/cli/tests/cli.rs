//! End-to-end runs of the binary: documented exit codes, report shapes, and
//! byte determinism.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_l2ext"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf8 stdout")
}

#[test]
fn reproduce_contains_the_quadratic_optimum() {
    let out = run(&["reproduce"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = stdout(&out);
    let row = csv
        .lines()
        .find(|line| line.starts_with("fn2,,,1.414"))
        .expect("fn2 optimal-delta row");
    let as_printed: f64 = row.split(',').nth(8).unwrap().parse().unwrap();
    assert!((as_printed - 5.8284271).abs() <= 2e-6, "as_printed {as_printed}");
    assert!(row.ends_with("true"), "discrepancy flag missing: {row}");
}

#[test]
fn divergent_spec_fails_certification() {
    let out = run(&["check-class", "--g", "x"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("DivergentMass"), "reason missing: {err}");
}

#[test]
fn disk_identity_case_passes() {
    let out = run(&["verify-disk", "--family", "fn2", "--delta", "1.4142", "--kappa", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = stdout(&out);
    let row = csv.lines().nth(1).expect("one verdict row");
    let ratio: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
    assert!((ratio - 1.0).abs() < 1e-7, "ratio {ratio}");
    assert!(row.ends_with("ok"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["check-class"]).status.code(), Some(1), "missing spec");
    assert_eq!(
        run(&["check-class", "--family", "fn1"]).status.code(),
        Some(1),
        "fn1 without --s"
    );
    assert_eq!(
        run(&["constant", "--family", "fn2", "--delta", "nonsense"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn class_check_passes_an_admissible_expression() {
    let out = run(&[
        "check-class",
        "--g",
        "x^1.5/s",
        "--param",
        "s=0.5",
        "--delta",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = stdout(&out);
    assert!(csv.starts_with("delta,C,K,witness_x,bound,ode_max_residual,h_ok,berg_ok"));
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for args in [
        vec!["reproduce"],
        vec!["sweep", "--family", "fn2", "--degree", "3"],
        vec!["twist-table", "--family", "fn3", "--s", "0.5", "--delta", "1", "--grid", "40"],
        vec!["check-class", "--family", "fn2", "--format", "json"],
    ] {
        let first = stdout(&run(&args));
        let second = stdout(&run(&args));
        assert_eq!(first, second, "non-deterministic output for {args:?}");
        assert!(!first.is_empty());
    }
}

#[test]
fn coupled_bidisk_case_passes() {
    let out = run(&[
        "verify-bidisk",
        "--family",
        "fn2",
        "--delta",
        "1",
        "--kappa",
        "0.5,0.5,0.6",
        "--f",
        "1,1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = stdout(&out);
    assert!(csv.lines().nth(1).unwrap().ends_with("ok"));
}

#[test]
fn json_format_round_trips() {
    let out = run(&["constant", "--family", "fn2", "--delta", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["K"].as_f64().unwrap(), 1.0);
    assert_eq!(value["generic_bound"].as_f64().unwrap(), 12.0);
    assert_eq!(value["spec_id"].as_str().unwrap(), "fn2");
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join("l2ext-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.csv");
    let piped = stdout(&run(&["reproduce"]));
    let written = run(&["reproduce", "--out", path.to_str().unwrap()]);
    assert_eq!(written.status.code(), Some(0));
    assert!(stdout(&written).is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), piped);
    std::fs::remove_file(&path).ok();
}
