//! End-to-end checks of the `qpr` binary and the exit-code contract.

use std::path::{Path, PathBuf};
use std::process::Command;

fn qpr() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qpr"))
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const RESONANT: &str = r#"
[problem]
l = 3
omega = [1.0, 1.0]
epsilon = 1e-3

[[problem.f.terms]]
degree = 0
mode = [0, 0]
re = 1.0

[numerics]
truncation = 8
rho = 0.1
m = 3.0
"#;

const WRONG_SIGN_EVEN: &str = r#"
[problem]
l = 2
omega = [1.0]
epsilon = 0.01
real_branch = true

[[problem.f.terms]]
degree = 0
mode = [0]
re = 1.0

[numerics]
truncation = 8
rho = 0.1
m = 2.0
"#;

#[test]
fn solve_bundled_config_reports_leading_term() {
    let dir = tempfile::tempdir().unwrap();
    let status = qpr()
        .args(["solve", "--config"])
        .arg(bundled("standard_l3.toml"))
        .arg("--out")
        .arg(dir.path())
        .arg("--quiet")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report = std::fs::read_to_string(dir.path().join("solve_report.txt")).unwrap();
    let tree = qpresponse::report::parse_tree(&report).unwrap();
    let a_re = qpresponse::report::get_float(&tree, "leading.a.0.re").unwrap();
    assert!((a_re + 0.1).abs() < 1e-12, "a = {a_re}");
    assert!(dir.path().join("v_coefficients.txt").exists());
}

#[test]
fn solve_resonant_frequency_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "resonant.toml", RESONANT);
    let out = qpr()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("(1,-1)"), "stderr: {stderr}");
}

#[test]
fn solve_wrong_sign_even_branch_is_math_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "wrong_sign.toml", WRONG_SIGN_EVEN);
    let out = qpr()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no real branch"), "stderr: {stderr}");
}

#[test]
fn sweep_fits_cube_root_law() {
    let dir = tempfile::tempdir().unwrap();
    let status = qpr()
        .args(["sweep", "--config"])
        .arg(bundled("standard_l3.toml"))
        .args(["--epsilons", "1e-2,1e-3,1e-4", "--out"])
        .arg(dir.path())
        .arg("--quiet")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let table = std::fs::read_to_string(dir.path().join("sweep_table.txt")).unwrap();
    let rows: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3, "one row per epsilon");
    let fit = std::fs::read_to_string(dir.path().join("scaling_fit.txt")).unwrap();
    let a_row = fit
        .lines()
        .find(|l| l.starts_with("a_abs"))
        .expect("a_abs fit row");
    let slope: f64 = a_row.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((slope - 1.0 / 3.0).abs() < 1e-10, "slope {slope}");
}

#[test]
fn sweep_requires_three_epsilons() {
    let dir = tempfile::tempdir().unwrap();
    let status = qpr()
        .args(["sweep", "--config"])
        .arg(bundled("standard_l3.toml"))
        .args(["--epsilons", "1e-3", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn monodromy_ratio_and_step_floor() {
    let dir = tempfile::tempdir().unwrap();
    let status = qpr()
        .args(["monodromy", "--config"])
        .arg(bundled("standard_l3.toml"))
        .args(["--alpha", "1e-3", "--loops", "1", "--steps", "128", "--out"])
        .arg(dir.path())
        .arg("--quiet")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let summary = std::fs::read_to_string(dir.path().join("monodromy_summary.txt")).unwrap();
    let tree = qpresponse::report::parse_tree(&summary).unwrap();
    let re = qpresponse::report::get_float(&tree, "ratio.re").unwrap();
    let im = qpresponse::report::get_float(&tree, "ratio.im").unwrap();
    let third = 2.0 * std::f64::consts::PI / 3.0;
    assert!((re - third.cos()).abs() < 1e-8 && (im - third.sin()).abs() < 1e-8);
    // path rows: loops * steps + 1
    let path = std::fs::read_to_string(dir.path().join("monodromy_path.txt")).unwrap();
    assert_eq!(path.lines().filter(|l| !l.starts_with('#')).count(), 129);

    // below the 64-step floor
    let status = qpr()
        .args(["monodromy", "--config"])
        .arg(bundled("standard_l3.toml"))
        .args(["--alpha", "1e-3", "--steps", "8", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn check_frequency_resonance_and_monotone_gamma() {
    let dir = tempfile::tempdir().unwrap();
    // resonant omega is a mathematical finding of this command
    let cfg = write_config(dir.path(), "resonant.toml", RESONANT);
    let out = qpr()
        .args(["check-frequency", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("(1,-1)"));

    // golden-mean table: gamma nondecreasing down the eta grid
    let status = qpr()
        .args(["check-frequency", "--config"])
        .arg(bundled("golden_frequency.toml"))
        .arg("--out")
        .arg(dir.path())
        .arg("--quiet")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let table = std::fs::read_to_string(dir.path().join("frequency_table.txt")).unwrap();
    let gammas: Vec<f64> = table
        .lines()
        .filter(|l| l.starts_with("eta"))
        .map(|l| l.split_whitespace().nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(gammas.len() >= 3);
    assert!(gammas.windows(2).all(|w| w[1] >= w[0] - 1e-15));
    assert!(gammas[0] > 0.0);
}

#[test]
fn verify_recomputes_saved_report() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in [
        "standard_l3.toml",
        "zero_average_l3.toml",
        "oscillator_l3.toml",
    ] {
        let sub = dir.path().join(cfg.replace(".toml", ""));
        let status = qpr()
            .args(["solve", "--config"])
            .arg(bundled(cfg))
            .arg("--out")
            .arg(&sub)
            .arg("--quiet")
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0), "solve {cfg}");
        let status = qpr()
            .args(["verify", "--config"])
            .arg(bundled(cfg))
            .arg("--out")
            .arg(&sub)
            .arg("--quiet")
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0), "verify {cfg}");
        assert!(sub.join("verify_report.txt").exists());
    }
}

#[test]
fn two_dimensional_config_solves() {
    let dir = tempfile::tempdir().unwrap();
    let status = qpr()
        .args(["solve", "--config"])
        .arg(bundled("two_dimensional.toml"))
        .arg("--out")
        .arg(dir.path())
        .arg("--quiet")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report = std::fs::read_to_string(dir.path().join("solve_report.txt")).unwrap();
    let tree = qpresponse::report::parse_tree(&report).unwrap();
    let sup = qpresponse::report::get_float(&tree, "residual.sup").unwrap();
    assert!(sup <= 1e-8, "residual {sup}");
}

#[test]
fn help_exits_zero_and_unknown_flag_is_input_error() {
    let status = qpr().arg("--help").status().unwrap();
    assert_eq!(status.code(), Some(0));
    let status = qpr().args(["solve", "--bogus"]).status().unwrap();
    assert_eq!(status.code(), Some(1));
}
