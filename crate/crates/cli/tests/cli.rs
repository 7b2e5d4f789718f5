use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn affunion(args: &[&str], output_root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_affunion"))
        .args(args)
        .env("AFFUNION_OUTPUT_ROOT", output_root)
        .output()
        .unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_config_reports_violations() {
    let tmp = tempfile::tempdir().unwrap();
    let ok = affunion(&["validate-config"], tmp.path());
    assert_eq!(ok.status.code(), Some(0));
    let bad = affunion(&["validate-config", "--s", "1.5", "--grid-res", "0.1"], tmp.path());
    assert_eq!(bad.status.code(), Some(1));
    let text = String::from_utf8_lossy(&bad.stdout);
    assert!(text.contains("s") && text.contains("grid_res"), "{text}");
}

#[test]
fn config_file_and_flags_combine() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "s = 2.0\n").unwrap();
    let bad = affunion(&["validate-config", "--config", path(&cfg)], tmp.path());
    assert_eq!(bad.status.code(), Some(1));
    let fixed = affunion(&["validate-config", "--config", path(&cfg), "--s", "0.5"], tmp.path());
    assert_eq!(fixed.status.code(), Some(0));
    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    let unknown = affunion(&["validate-config", "--config", path(&cfg)], tmp.path());
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn construct_then_estimate_a_segment_union() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sharp");
    let built = affunion(&["construct", "sharpness", "--out", path(&out), "--depth", "4"], tmp.path());
    assert!(built.status.success(), "{}", String::from_utf8_lossy(&built.stderr));
    let summary = stdout_json(&built);
    assert_eq!(summary["family"]["planes"], 16);
    assert!(summary["frostman"]["constant"].as_f64().unwrap() <= 8.0);

    let series = tmp.path().join("series.csv");
    let est = affunion(
        &["estimate-dim", "--cloud", path(&out.join("cloud.csv")), "--series-out", path(&series)],
        tmp.path(),
    );
    assert!(est.status.success(), "{}", String::from_utf8_lossy(&est.stderr));
    let dim = stdout_json(&est)["dimension"].as_f64().unwrap();
    assert!((dim - 2.0).abs() <= 0.15, "{dim}");
    assert!(std::fs::read_to_string(&series).unwrap().starts_with("scale,value\n"));
}

#[test]
fn geometry_and_l2_report_on_a_small_family() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sharp");
    let built = affunion(&["construct", "sharpness", "--out", path(&out), "--depth", "2"], tmp.path());
    assert!(built.status.success());
    let family = out.join("family.csv");

    let geo = affunion(&["verify-geometry", "--family", path(&family), "--samples", "4000"], tmp.path());
    assert_eq!(geo.status.code(), Some(0));
    let report = stdout_json(&geo);
    assert_eq!(report["separation_violations"], 0);
    assert_eq!(report["pairs"].as_array().unwrap().len(), 6);

    let mut clouds: Vec<PathBuf> = std::fs::read_dir(out.join("clouds"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    clouds.sort();
    let mut args = vec!["l2-report", "--family", path(&family), "--samples", "20000", "--clouds"];
    args.extend(clouds.iter().map(|p| path(p)));
    let l2 = affunion(&args, tmp.path());
    assert!(l2.status.success(), "{}", String::from_utf8_lossy(&l2.stderr));
    let report = stdout_json(&l2);
    assert_eq!(report["cs_ok"], true);
    assert_eq!(report["tube_mass"].as_array().unwrap().len(), 4);
    for key in ["l", "M", "mu_tilde", "pair_mass", "F_vol", "shells", "ade_pass", "fitted_exponents"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn run_writes_an_append_only_report() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["run", "geometry-suite", "--pairs", "40", "--samples", "3000"];
    let first = affunion(&args, tmp.path());
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let text = String::from_utf8_lossy(&first.stdout);
    assert!(text.lines().any(|l| l.starts_with("PASS ")));
    let second = affunion(&args, tmp.path());
    assert_eq!(second.status.code(), Some(0));
    let runs: Vec<_> = std::fs::read_dir(tmp.path().join("geometry-suite")).unwrap().collect();
    assert_eq!(runs.len(), 2);
    let dir = runs[0].as_ref().unwrap().path();
    for f in ["config.toml", "report.json", "manifest.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
}

#[test]
fn failing_criterion_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = affunion(&["run", "l2-suite", "--ade-floor", "1e30"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed criterion"));
}

#[test]
fn unknown_experiment_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = affunion(&["run", "nope"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}
