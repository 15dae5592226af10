use std::fs;
use std::path::{Path, PathBuf};

use eulerlab::harness::*;
use eulerlab::par;

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("golden")
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(from).unwrap() {
        let e = e.unwrap();
        let target = to.join(e.file_name());
        if e.file_type().unwrap().is_dir() {
            copy_dir(&e.path(), &target);
        } else {
            fs::copy(e.path(), target).unwrap();
        }
    }
}

/// A scratch golden directory holding only `names`.
fn scratch(names: &[&str]) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for n in names {
        copy_dir(&golden_dir().join(n), &dir.path().join(n));
    }
    dir
}

#[test]
fn shipped_golden_suite_verifies() {
    let report = cmd_verify(&golden_dir()).unwrap();
    assert!(report.passed(), "{report}");
    assert_eq!(report.experiments.len(), EXPERIMENTS.len());
}

#[test]
fn perturbed_dt_lists_drifted_columns() {
    let dir = scratch(&["ns_decay"]);
    let cfg_path = dir.path().join("ns_decay").join("config.toml");
    let text = fs::read_to_string(&cfg_path).unwrap().replace("dt = 0.01", "dt = 0.005");
    fs::write(&cfg_path, text).unwrap();
    let report = cmd_verify(dir.path()).unwrap();
    assert!(!report.passed());
    let drifted = report.drifted_columns();
    assert!(drifted.contains(&"diagnostics.csv:dissipation_running".to_string()), "{report}");
    assert!(drifted.contains(&"diagnostics.csv:balance_residual".to_string()), "{report}");
    let problems = &report.experiments[0].1;
    assert!(problems.iter().any(|p| matches!(p, Problem::ManifestField { field } if field == "config")));
    assert!(!problems.iter().any(|p| matches!(p, Problem::ChecksumMismatch { .. })));
}

#[test]
fn corrupted_csv_reports_checksum_mismatch() {
    let dir = scratch(&["tg_stationarity"]);
    let csv = dir.path().join("tg_stationarity").join("diagnostics.csv");
    let mut text = fs::read_to_string(&csv).unwrap();
    text = text.replacen("e0,", "e1,", 1);
    fs::write(&csv, text).unwrap();
    let report = cmd_verify(dir.path()).unwrap();
    assert!(!report.passed());
    let problems = &report.experiments[0].1;
    assert!(problems.contains(&Problem::ChecksumMismatch { file: "diagnostics.csv".into() }), "{report}");
}

#[test]
fn truncated_csv_reports_row_counts() {
    let dir = scratch(&["radii"]);
    let csv = dir.path().join("radii").join("radii.csv");
    let text = fs::read_to_string(&csv).unwrap();
    let kept: Vec<&str> = text.lines().take(3).collect();
    fs::write(&csv, kept.join("\n") + "\n").unwrap();
    let report = cmd_verify(dir.path()).unwrap();
    let problems = &report.experiments[0].1;
    assert!(problems.iter().any(|p| matches!(p, Problem::RowCountMismatch { golden: 2, .. })), "{report}");
}

#[test]
fn missing_golden_file_is_reported() {
    let dir = scratch(&["jensen_gap"]);
    fs::remove_file(dir.path().join("jensen_gap").join("jensen.csv")).unwrap();
    let report = cmd_verify(dir.path()).unwrap();
    assert!(report.experiments[0].1.contains(&Problem::MissingFile { file: "jensen.csv".into() }));
}

#[test]
fn empty_golden_dir_does_not_pass() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!cmd_verify(dir.path()).unwrap().passed());
}

#[test]
fn run_writes_outputs_and_manifest() {
    let out = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::load(&golden_dir().join("transport").join("config.toml")).unwrap();
    let m = cmd_run(&cfg, out.path());
    assert_eq!(m.exit_code, EXIT_OK, "{m:?}");
    let back = RunManifest::read(out.path()).unwrap();
    assert_eq!(back, m);
    for o in &m.outputs {
        let bytes = fs::read(out.path().join(&o.name)).unwrap();
        assert_eq!(manifest::sha256_hex(&bytes), o.sha256);
    }
    assert!(m.output("summary.csv").is_some());
    assert!(out.path().join("config.toml").is_file());
}

#[test]
fn failed_assertion_exits_one_with_manifest() {
    let out = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::load(&golden_dir().join("ns_decay").join("config.toml")).unwrap();
    // the decay error is roundoff-sized but not zero
    cfg.tolerance.insert("decay".into(), 0.0);
    let m = cmd_run(&cfg, out.path());
    assert_eq!(m.exit_code, EXIT_ASSERTION);
    let failed: Vec<&str> = m.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    assert_eq!(failed, ["decay_relative_error"]);
    assert_eq!(RunManifest::read(out.path()).unwrap(), m);
}

#[test]
fn aborted_run_still_writes_manifest() {
    let out = tempfile::tempdir().unwrap();
    let mut cfg = default_config("vanishing_viscosity").unwrap();
    cfg.scheme.nu.clear();
    let m = cmd_run(&cfg, out.path());
    assert_eq!(m.exit_code, EXIT_CONFIG);
    assert!(m.error.is_some());
    let back = RunManifest::read(out.path()).unwrap();
    assert_eq!(back.exit_code, EXIT_CONFIG);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    for name in ["weak_strong", "jensen_gap", "vanishing_viscosity"] {
        let cfg = ExperimentConfig::load(&golden_dir().join(name).join("config.toml")).unwrap();
        let one = par::with_threads(1, || execute(&cfg).unwrap());
        let many = par::with_threads(4, || execute(&cfg).unwrap());
        for (a, b) in one.outputs.iter().zip(&many.outputs) {
            assert_eq!(a.name, b.name);
            assert!(a.bytes == b.bytes, "{name}/{} differs across thread counts", a.name);
        }
    }
}
