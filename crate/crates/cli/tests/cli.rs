//! End-to-end runs of the binary: exit codes, file layout, and a few
//! spot-checked values.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run_in(dir: &Path, sub: &str, config: &str, threads: usize) -> Output {
    let cfg_path = dir.join("config.json");
    fs::write(&cfg_path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_weylcert"))
        .arg(sub)
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir)
        .arg("--threads")
        .arg(threads.to_string())
        .output()
        .unwrap()
}

fn csv_rows(dir: &Path, name: &str) -> Vec<Vec<String>> {
    let text = fs::read_to_string(dir.join(name)).unwrap();
    assert!(!text.contains('\r'), "line endings must be LF only");
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn solve_writes_solution_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        "solve",
        r#"{"command": "solve", "model": {"family": "constant", "params": [1.0, 0.0]},
            "lambda": 0.0, "n": 16}"#,
        1,
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(dir.path(), "solve.csv");
    assert_eq!(rows[0], ["n", "mantissa", "log_scale", "log_abs_y"]);
    // Sites -1..=16 plus the header.
    assert_eq!(rows.len(), 19);
    // At the bottom of the band the solution is y_n = n + 1.
    let site3 = rows.iter().find(|r| r[0] == "3").unwrap();
    let log_abs: f64 = site3[3].parse().unwrap();
    assert!((log_abs - 4f64.ln()).abs() < 1e-12);
    assert!(dir.path().join("solve.meta").exists());
}

#[test]
fn scan_marks_band_interior_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        "scan",
        r#"{"command": "scan", "model": {"family": "constant", "params": [1.0, 0.0]},
            "lambda_grid": [1.0, 2.0], "n": 64}"#,
        2,
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(dir.path(), "scan.csv");
    assert_eq!(rows[0], ["lambda", "beta_hat", "theta_hat", "in_E", "dist"]);
    assert_eq!(rows.len(), 3);
    for row in &rows[1..] {
        assert_eq!(row[3], "true", "row: {row:?}");
        let dist: f64 = row[4].parse().unwrap();
        assert!(dist <= 0.05, "dist {dist} too large for a 64-site section");
    }
    let meta = fs::read_to_string(dir.path().join("scan.meta")).unwrap();
    assert!(meta.contains("beta_cut="));
    assert!(meta.contains("residual_rms="));
    assert!(meta.contains("max_dist_in_E="));
}

#[test]
fn classify_flags_super_exponential_weights() {
    // a_k = e^{k^2} breaks the bounded-variation hypothesis; the run must
    // report ineligibility through exit code 2.
    let values: Vec<String> =
        (0..=26).map(|k| format!("{:.17e}", ((k * k) as f64).exp())).collect();
    let zeros: Vec<String> = (0..=26).map(|_| "0.0".to_string()).collect();
    let config = format!(
        r#"{{"command": "classify", "model": {{"a": [{}], "b": [{}]}}, "n": 25}}"#,
        values.join(", "),
        zeros.join(", ")
    );
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "classify", &config, 1);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(dir.path(), "classify.csv");
    let get = |key: &str| {
        rows.iter().find(|r| r[0] == key).unwrap_or_else(|| panic!("missing {key}"))[1].clone()
    };
    assert_eq!(get("eligible"), "false");
    assert_eq!(get("c1_ok"), "false");
    assert_ne!(get("first_violation"), "none");
}

#[test]
fn perturb_with_zero_perturbation_reports_exact_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        "perturb",
        r#"{"command": "perturb", "model": {"family": "constant", "params": [1.0, 1.0]},
            "eta": {"kind": "zero"}, "psi": {"kind": "zero"},
            "n_list": [32, 48], "window": [0.5, 5.5]}"#,
        1,
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(dir.path(), "perturb.csv");
    assert_eq!(rows.len(), 3);
    for row in &rows[1..] {
        let h: f64 = row[1].parse().unwrap();
        assert_eq!(h, 0.0);
        assert_eq!(row[2], "0");
    }
    let report = csv_rows(dir.path(), "perturb_report.csv");
    assert!(report.iter().any(|r| r[0] == "satisfied" && r[1] == "true"));
}

#[test]
fn malformed_config_names_the_bad_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "solve", r#"{"command": "solve", "lamda": 1.0}"#, 1);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lamda"), "stderr was: {err}");
}

#[test]
fn command_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        "spectrum",
        r#"{"command": "solve", "model": {"family": "wimp"}, "lambda": 1.0, "n": 8}"#,
        1,
    );
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("solve") && err.contains("spectrum"), "stderr was: {err}");
}
