//! End-to-end tests of the `wglasso` binary: exit codes, file outputs, and
//! flag/config interplay.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_wglasso")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

#[test]
fn simulate_estimate_export_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "simulate", "--model", "ar1", "--p", "6", "--n1", "40", "--gamma", "0.1", "--mu",
            "5", "--seed", "3", "--output", "d.csv", "--truth-out", "truth.csv",
        ],
    );
    assert!(out.status.success());

    let out = run_in(
        dir.path(),
        &["estimate", "--input", "d.csv", "--rho", "0.2", "--out-dir", "est"],
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(dir.path().join("est/omega.csv").exists());
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("est/summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["rho"], 0.2);
    assert_eq!(summary["converged"], true);

    let out = run_in(
        dir.path(),
        &[
            "export-graph", "--input", "est/omega.csv", "--format", "edgelist", "--output",
            "edges.csv",
        ],
    );
    assert!(out.status.success());
    let ranking = String::from_utf8(out.stdout).unwrap();
    assert!(ranking.starts_with("node,degree\n"));
    let edges = std::fs::read_to_string(dir.path().join("edges.csv")).unwrap();
    assert!(edges.starts_with("source,target,weight\n"));
}

#[test]
fn parse_error_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "1,2\n3,oops\n").unwrap();
    let out = run_in(
        dir.path(),
        &["estimate", "--input", "bad.csv", "--rho", "0.1"],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "diagnostic names the row: {err}");

    // missing file is also an input error
    let out = run_in(dir.path(), &["estimate", "--input", "nope.csv", "--rho", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    // two identical rows centered become all zeros: the ridge cannot fix a
    // zero covariance and the initializer inversion fails
    std::fs::write(dir.path().join("flat.csv"), "1,2\n1,2\n").unwrap();
    let out = run_in(
        dir.path(),
        &["estimate", "--input", "flat.csv", "--rho", "0.1"],
    );
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn no_convergence_exits_with_code_4_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "simulate", "--model", "ar1", "--p", "5", "--n1", "40", "--seed", "9", "--output",
            "d.csv",
        ],
    );
    assert!(out.status.success());
    // one refit iteration cannot satisfy the step threshold on this data
    let out = run_in(
        dir.path(),
        &[
            "estimate", "--input", "d.csv", "--rho", "0.05", "--max-iter", "1", "--out-dir",
            "est",
        ],
    );
    assert_eq!(out.status.code(), Some(4), "{out:?}");
    assert!(dir.path().join("est/omega.csv").exists());
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("est/summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["converged"], false);
}

#[test]
fn bench_config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "models": ["ar1"],
        "p": [5],
        "gamma": [0.0, 0.1],
        "mu": [5.0],
        "n1": 20,
        "reps": 4,
        "methods": ["glasso", "lw"],
        "seed": 11,
        "rho": {"policy": "fixed", "value": 0.2}
    });
    std::fs::write(
        dir.path().join("spec.json"),
        serde_json::to_string_pretty(&config).unwrap(),
    )
    .unwrap();
    // override reps and gamma from the command line
    let out = run_in(
        dir.path(),
        &[
            "bench", "--config", "spec.json", "--reps", "2", "--gamma", "0.1", "--output",
            "results.csv",
        ],
    );
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    // 1 model x 1 p x 1 gamma (overridden) x 1 mu x 2 methods
    assert_eq!(rows.len(), 2, "{csv}");
    assert!(rows.iter().all(|r| r.contains(",0.1,")));

    // config-only run keeps the file's grid
    let out = run_in(
        dir.path(),
        &["bench", "--config", "spec.json", "--output", "full.csv"],
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("full.csv")).unwrap();
    assert_eq!(csv.lines().skip(1).count(), 4);
}

#[test]
fn convergence_command_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "convergence", "--model", "identity", "--p", "4", "--gamma", "0", "--n", "20,40",
            "--reps", "2", "--seed", "5", "--rho", "0.3", "--output", "conv.csv",
        ],
    );
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(dir.path().join("conv.csv")).unwrap();
    assert_eq!(csv.lines().skip(1).count(), 4); // two n values x two methods
}

#[test]
fn cv_command_reports_best_rho() {
    let dir = tempfile::tempdir().unwrap();
    run_in(
        dir.path(),
        &[
            "simulate", "--model", "ar1", "--p", "4", "--n1", "30", "--seed", "2", "--output",
            "d.csv",
        ],
    );
    let out = run_in(
        dir.path(),
        &[
            "cv", "--input", "d.csv", "--grid", "0.1:0.5:3", "--folds", "3", "--seed", "1",
            "--out-dir", ".",
        ],
    );
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("best_rho "));
    let cv: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cv.json")).unwrap())
            .unwrap();
    assert_eq!(cv["table"].as_array().unwrap().len(), 3);
}
