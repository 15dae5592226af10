use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::init::RandomSpectrum;

/// Experiment configuration, read from a TOML file. Every section is
/// optional; unknown keys anywhere are rejected.
///
/// ```toml
/// experiment = "ns_decay"
/// seed = 42
///
/// [grid]
/// n = 64
///
/// [time]
/// t_end = 1.0
/// dt = 1e-3
/// save_every = 10
///
/// [scheme]
/// nu = [0.1]
///
/// [initial]
/// kind = "taylor_green"
///
/// [tolerance]
/// decay = 1e-7
/// ```
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Output directory; `--out` overrides it.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub flow: FlowSection,
    #[serde(default)]
    pub bounds: BoundsSection,
    /// Per-experiment assertion thresholds, by name.
    #[serde(default)]
    pub tolerance: BTreeMap<String, f64>,
    /// Per-column tolerances used by `verify`, by column name.
    #[serde(default)]
    pub verify: BTreeMap<String, ColumnTolerance>,
}

fn default_seed() -> u64 {
    42
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 64 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub t_end: f64,
    pub dt: f64,
    pub save_every: usize,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self { t_end: 1.0, dt: 1e-3, save_every: 10 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeSection {
    /// Viscosities (or diffusivities for scalar experiments).
    pub nu: Vec<f64>,
    pub kappa: Vec<f64>,
    /// Galerkin truncations `n`.
    pub galerkin_n: Vec<usize>,
    /// Galerkin truncation of the reference run.
    pub reference_n: Option<usize>,
    /// Largest grid the resolution schedule may use.
    pub max_n: Option<usize>,
    /// Number of seeded runs (or training runs for calibration).
    pub runs: usize,
    /// Held-out runs for calibration experiments.
    pub holdout: usize,
    /// Perturbation sizes.
    pub eps: Vec<f64>,
}

impl Default for SchemeSection {
    fn default() -> Self {
        Self {
            nu: Vec::new(),
            kappa: Vec::new(),
            galerkin_n: Vec::new(),
            reference_n: None,
            max_n: None,
            runs: 1,
            holdout: 0,
            eps: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    TaylorGreen,
    Shear,
    Random,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub kind: InitialKind,
    pub band: usize,
    pub slope: f64,
    pub l2_norm: f64,
}

impl Default for InitialSection {
    fn default() -> Self {
        let r = RandomSpectrum::default();
        Self { kind: InitialKind::TaylorGreen, band: r.band, slope: r.slope, l2_norm: r.l2_norm }
    }
}

impl InitialSection {
    pub fn spectrum(&self) -> RandomSpectrum {
        RandomSpectrum { band: self.band, slope: self.slope, l2_norm: self.l2_norm }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSection {
    /// Particles per side.
    pub m: usize,
    pub dt: f64,
    /// Cells per side for the compressibility estimate.
    pub cells: usize,
}

impl Default for FlowSection {
    fn default() -> Self {
        Self { m: 64, dt: 1e-2, cells: 16 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsSection {
    pub c: Vec<f64>,
    pub s: f64,
    pub k: Vec<u32>,
    pub doubled: bool,
}

impl Default for BoundsSection {
    fn default() -> Self {
        Self { c: vec![1.0], s: 3.0, k: vec![1], doubled: false }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ColumnTolerance {
    #[serde(default)]
    pub rel: f64,
    #[serde(default)]
    pub abs: f64,
}

impl Default for ColumnTolerance {
    fn default() -> Self {
        Self { rel: 1e-10, abs: 1e-13 }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Default configuration of a named experiment.
    pub fn named(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            seed: default_seed(),
            out: None,
            grid: GridSection::default(),
            time: TimeSection::default(),
            scheme: SchemeSection::default(),
            initial: InitialSection::default(),
            flow: FlowSection::default(),
            bounds: BoundsSection::default(),
            tolerance: BTreeMap::new(),
            verify: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if super::experiments::find(&self.experiment).is_none() {
            return bad(format!("unknown experiment '{}'", self.experiment));
        }
        if self.grid.n < 8 || !self.grid.n.is_multiple_of(2) {
            return bad(format!("grid.n = {} must be even and >= 8", self.grid.n));
        }
        let t = &self.time;
        if !(t.dt > 0.0) || !(t.t_end > 0.0) || t.save_every == 0 {
            return bad("time.t_end, time.dt must be positive and time.save_every >= 1".into());
        }
        match crate::dynamics::step_count(t.t_end, t.dt) {
            Ok(steps) if steps % t.save_every == 0 => {}
            Ok(steps) => return bad(format!("time.save_every = {} must divide the {steps} steps", t.save_every)),
            Err(e) => return bad(e.to_string()),
        }
        if self.scheme.nu.iter().chain(&self.scheme.kappa).any(|v| !(*v >= 0.0)) {
            return bad("scheme.nu and scheme.kappa must be >= 0".into());
        }
        if self.flow.m == 0 || self.flow.cells == 0 || !(self.flow.dt > 0.0) {
            return bad("flow.m and flow.cells must be >= 1 and flow.dt positive".into());
        }
        if self.tolerance.values().any(|v| !(*v >= 0.0)) {
            return bad("tolerances must be >= 0".into());
        }
        Ok(())
    }

    /// Tolerance override or the given default.
    pub fn tol(&self, name: &str, default: f64) -> f64 {
        self.tolerance.get(name).copied().unwrap_or(default)
    }

    pub fn column_tolerance(&self, column: &str) -> ColumnTolerance {
        self.verify.get(column).copied().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_defaults() {
        let cfg = ExperimentConfig::parse("experiment = \"ns_decay\"\n[grid]\nn = 32\n").unwrap();
        assert_eq!(cfg.grid.n, 32);
        assert_eq!(cfg.time, TimeSection::default());
        assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::parse("experiment = \"ns_decay\"\ncolour = 3\n").is_err());
        assert!(ExperimentConfig::parse("experiment = \"ns_decay\"\n[grid]\nm = 3\n").is_err());
        assert!(ExperimentConfig::parse("experiment = \"nope\"\n").is_err());
        assert!(ExperimentConfig::parse("experiment = \"ns_decay\"\n[grid]\nn = 7\n").is_err());
        assert!(ExperimentConfig::parse("experiment = \"ns_decay\"\n[time]\ndt = 0.3\n").is_err());
        assert!(ExperimentConfig::parse("experiment = \"ns_decay\"\n[time]\nsave_every = 7\n").is_err());
    }
}
