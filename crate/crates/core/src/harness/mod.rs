//! Experiment runner: configuration, the named experiments, run manifests and
//! golden-file verification.

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod verify;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub use config::{ColumnTolerance, ExperimentConfig, InitialKind};
pub use experiments::{default_config, execute, find, Check, Experiment, Outcome, RunRecord, RunStatus, EXPERIMENTS};
pub use manifest::{OutputFile, RunManifest, Versions, EXIT_ASSERTION, EXIT_BLOW_UP, EXIT_CONFIG, EXIT_OK};
pub use verify::{cmd_verify, Problem, VerifyReport};

use crate::error::Error;

pub const CONFIG_FILE: &str = "config.toml";

/// Exit code for a finished experiment.
pub fn exit_code(outcome: &Outcome) -> i32 {
    if outcome.runs.iter().any(|r| r.status == RunStatus::BlowUp) {
        EXIT_BLOW_UP
    } else if outcome.passed() {
        EXIT_OK
    } else {
        EXIT_ASSERTION
    }
}

fn error_exit(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        Error::BlowUp { .. } => EXIT_BLOW_UP,
        _ => EXIT_ASSERTION,
    }
}

/// Runs `cfg` and writes its outputs, `config.toml` and `manifest.json`
/// into `out`. The manifest is written whatever happens; its `exit_code`
/// is what the CLI returns.
pub fn cmd_run(cfg: &ExperimentConfig, out: &Path) -> RunManifest {
    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut echo = cfg.clone();
    echo.out = None;
    let mut manifest = RunManifest {
        experiment: cfg.experiment.clone(),
        seed: cfg.seed,
        config: echo.to_toml(),
        versions: Versions::current(),
        started_unix,
        wall_clock_seconds: 0.0,
        runs: Vec::new(),
        checks: Vec::new(),
        outputs: Vec::new(),
        exit_code: EXIT_OK,
        error: None,
    };
    if let Err(e) = std::fs::create_dir_all(out) {
        log::error!("cannot create {}: {e}", out.display());
        manifest.exit_code = EXIT_ASSERTION;
        manifest.error = Some(e.to_string());
        return manifest;
    }
    let _ = std::fs::write(out.join(CONFIG_FILE), &manifest.config);

    let result = catch_unwind(AssertUnwindSafe(|| execute(cfg)));
    match result {
        Ok(Ok(outcome)) => {
            manifest.exit_code = exit_code(&outcome);
            manifest.runs = outcome.runs;
            manifest.checks = outcome.checks;
            for o in &outcome.outputs {
                match std::fs::write(out.join(&o.name), &o.bytes) {
                    Ok(()) => manifest.outputs.push(OutputFile::of(&o.name, &o.bytes)),
                    Err(e) => {
                        manifest.exit_code = EXIT_ASSERTION;
                        manifest.error = Some(format!("{}: {e}", o.name));
                    }
                }
            }
            for c in manifest.checks.iter().filter(|c| !c.passed) {
                log::warn!("check {} failed: {:e} vs limit {:e}", c.name, c.value, c.limit);
            }
        }
        Ok(Err(e)) => {
            log::error!("{} aborted: {e}", cfg.experiment);
            manifest.exit_code = error_exit(&e);
            if let Error::BlowUp { .. } = e {
                manifest.runs.push(RunRecord { label: cfg.experiment.clone(), status: RunStatus::BlowUp });
            }
            manifest.error = Some(e.to_string());
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            log::error!("{} panicked: {msg}", cfg.experiment);
            manifest.exit_code = EXIT_ASSERTION;
            manifest.error = Some(msg);
        }
    }
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    if let Err(e) = manifest.write(out) {
        log::error!("cannot write manifest: {e}");
        manifest.exit_code = EXIT_ASSERTION.max(manifest.exit_code);
    }
    manifest
}
