//! Golden-file regression. A golden directory holds one subdirectory per
//! experiment, each with the `config.toml`, `manifest.json` and outputs of a
//! reference run.

use std::fmt;
use std::path::Path;

use super::config::ExperimentConfig;
use super::experiments::{execute, Output};
use super::manifest::{sha256_hex, RunManifest};
use super::{exit_code, CONFIG_FILE};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub enum Problem {
    MissingFile { file: String },
    /// The golden file no longer matches the hash in its manifest.
    ChecksumMismatch { file: String },
    /// A file the reference run produced and the new run did not, or the
    /// other way around.
    OutputSetChanged { file: String },
    HeaderChanged { file: String },
    RowCountMismatch { file: String, golden: usize, fresh: usize },
    /// A column moved beyond its tolerance; `max_abs` is the largest
    /// absolute deviation and `row` where it happened.
    ColumnDrift { file: String, column: String, max_abs: f64, row: usize },
    /// A non-numeric cell differs.
    CellChanged { file: String, column: String, row: usize },
    /// A non-CSV output is not byte-identical.
    BytesChanged { file: String },
    /// A deterministic manifest field differs.
    ManifestField { field: String },
    Error { message: String },
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Problem::MissingFile { file } => write!(f, "{file}: missing"),
            Problem::ChecksumMismatch { file } => write!(f, "{file}: checksum mismatch with golden manifest"),
            Problem::OutputSetChanged { file } => write!(f, "{file}: present in only one of golden and fresh runs"),
            Problem::HeaderChanged { file } => write!(f, "{file}: header changed"),
            Problem::RowCountMismatch { file, golden, fresh } => {
                write!(f, "{file}: {fresh} rows, golden has {golden}")
            }
            Problem::ColumnDrift { file, column, max_abs, row } => {
                write!(f, "{file}: column {column} drifted by {max_abs:e} (row {row})")
            }
            Problem::CellChanged { file, column, row } => write!(f, "{file}: column {column} changed at row {row}"),
            Problem::BytesChanged { file } => write!(f, "{file}: bytes differ"),
            Problem::ManifestField { field } => write!(f, "manifest: {field} differs"),
            Problem::Error { message } => write!(f, "error: {message}"),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    /// `(experiment directory, problems)` in directory order.
    pub experiments: Vec<(String, Vec<Problem>)>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        !self.experiments.is_empty() && self.experiments.iter().all(|(_, p)| p.is_empty())
    }

    /// Columns reported as drifted, as `file:column`.
    pub fn drifted_columns(&self) -> Vec<String> {
        self.experiments
            .iter()
            .flat_map(|(_, ps)| ps)
            .filter_map(|p| match p {
                Problem::ColumnDrift { file, column, .. } => Some(format!("{file}:{column}")),
                _ => None,
            })
            .collect()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, problems) in &self.experiments {
            if problems.is_empty() {
                writeln!(f, "{name}: ok")?;
            } else {
                writeln!(f, "{name}: {} problem(s)", problems.len())?;
                for p in problems {
                    writeln!(f, "  {p}")?;
                }
            }
        }
        Ok(())
    }
}

/// Checks every experiment directory under `golden_dir`.
pub fn cmd_verify(golden_dir: &Path) -> Result<VerifyReport> {
    let mut dirs: Vec<_> = std::fs::read_dir(golden_dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.join(CONFIG_FILE).is_file())
        .collect();
    dirs.sort();
    let mut report = VerifyReport::default();
    for dir in dirs {
        let name = dir.file_name().unwrap().to_string_lossy().into_owned();
        log::info!("verifying {name}");
        let problems = verify_one(&dir).unwrap_or_else(|e| vec![Problem::Error { message: e.to_string() }]);
        report.experiments.push((name, problems));
    }
    Ok(report)
}

fn verify_one(dir: &Path) -> Result<Vec<Problem>> {
    let mut problems = Vec::new();
    let golden = RunManifest::read(dir)?;
    for o in &golden.outputs {
        match std::fs::read(dir.join(&o.name)) {
            Ok(bytes) if sha256_hex(&bytes) == o.sha256 => {}
            Ok(_) => problems.push(Problem::ChecksumMismatch { file: o.name.clone() }),
            Err(_) => problems.push(Problem::MissingFile { file: o.name.clone() }),
        }
    }

    let cfg = ExperimentConfig::load(&dir.join(CONFIG_FILE))?;
    let outcome = execute(&cfg)?;
    let mut echo = cfg.clone();
    echo.out = None;
    let fresh_code = exit_code(&outcome);
    for (field, same) in [
        ("experiment", golden.experiment == cfg.experiment),
        ("seed", golden.seed == cfg.seed),
        ("config", golden.config == echo.to_toml()),
        ("runs", golden.runs == outcome.runs),
        ("exit_code", golden.exit_code == fresh_code),
        (
            "checks",
            golden.checks.len() == outcome.checks.len()
                && golden.checks.iter().zip(&outcome.checks).all(|(a, b)| a.name == b.name && a.passed == b.passed),
        ),
    ] {
        if !same {
            problems.push(Problem::ManifestField { field: field.into() });
        }
    }

    for o in &golden.outputs {
        if !outcome.outputs.iter().any(|f| f.name == o.name) {
            problems.push(Problem::OutputSetChanged { file: o.name.clone() });
        }
    }
    for fresh in &outcome.outputs {
        if golden.output(&fresh.name).is_none() {
            problems.push(Problem::OutputSetChanged { file: fresh.name.clone() });
            continue;
        }
        let Ok(bytes) = std::fs::read(dir.join(&fresh.name)) else { continue };
        if fresh.name.ends_with(".csv") {
            compare_csv(&cfg, &fresh.name, &bytes, fresh, &mut problems)?;
        } else if bytes != fresh.bytes {
            problems.push(Problem::BytesChanged { file: fresh.name.clone() });
        }
    }
    Ok(problems)
}

fn read_table(bytes: &[u8]) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, _>>()?;
    Ok((header, rows))
}

fn compare_csv(
    cfg: &ExperimentConfig,
    file: &str,
    golden_bytes: &[u8],
    fresh: &Output,
    problems: &mut Vec<Problem>,
) -> Result<()> {
    let (gh, grows) = read_table(golden_bytes)?;
    let (fh, frows) = read_table(&fresh.bytes)?;
    if gh != fh {
        problems.push(Problem::HeaderChanged { file: file.into() });
        return Ok(());
    }
    if grows.len() != frows.len() {
        problems.push(Problem::RowCountMismatch { file: file.into(), golden: grows.len(), fresh: frows.len() });
    }
    for (c, column) in gh.iter().enumerate() {
        let tol = cfg.column_tolerance(column);
        let mut worst: Option<(f64, usize)> = None;
        let mut changed = None;
        for (i, (g, f)) in grows.iter().zip(&frows).enumerate() {
            let (g, f) = (&g[c], &f[c]);
            match (g.parse::<f64>(), f.parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    let dev = (a - b).abs();
                    let same = a == b || (a.is_nan() && b.is_nan());
                    if !same && !(dev <= tol.abs + tol.rel * a.abs().max(b.abs())) {
                        let dev = if dev.is_nan() { f64::INFINITY } else { dev };
                        if worst.is_none_or(|(w, _)| dev > w) {
                            worst = Some((dev, i));
                        }
                    }
                }
                _ if g != f => {
                    changed.get_or_insert(i);
                }
                _ => {}
            }
        }
        if let Some((max_abs, row)) = worst {
            problems.push(Problem::ColumnDrift { file: file.into(), column: column.clone(), max_abs, row });
        }
        if let Some(row) = changed {
            problems.push(Problem::CellChanged { file: file.into(), column: column.clone(), row });
        }
    }
    Ok(())
}
