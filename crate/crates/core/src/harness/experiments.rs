//! The named experiments. Each one reads an [`ExperimentConfig`], runs, and
//! returns its tables, per-run statuses and pass/fail checks; writing files
//! is left to the runner.

use std::sync::Arc;

use super::config::{ExperimentConfig, InitialKind};
use crate::analysis::{
    anomalous_dissipation_series, calibrate_constant, jensen_gap, ensemble_variance, residual_radius,
    scalar_dissipation_series, weak_strong_report, write_dissipation_csv, write_radii_csv, write_stability_csv,
    BoundParams, DissipationRow, GrowthSample, RadiusRow, RadiusVariant, ResolutionSchedule, SeriesOptions,
};
use crate::dynamics::{
    diagnostics, run_velocity, FrozenVelocity, RunOptions, SolutionPath, SystemSpec, VelocitySource,
};
use crate::error::{Error, Result};
use crate::lagrangian::{
    certify, flow_distance, gronwall_bound, integrate_flow, pushforward, renormalize_check, seed_grid,
    Direction, FlowOptions, Renormalizer, VolumeOptions,
};
use crate::par;
use crate::spectral::snapshot::Snapshot;
use crate::spectral::{
    galerkin_project, init, scalar_norm, vector_norm, FourierGrid, NormKind, PhysicalScalar, SpectralVector,
};

/// Status of one run inside an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Ok,
    BlowUp,
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub status: RunStatus,
}

/// One asserted property: `value` compared against `limit`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "lenient_f64")]
    pub value: f64,
    #[serde(with = "lenient_f64")]
    pub limit: f64,
    pub passed: bool,
}

/// JSON has no infinities or NaN; those are written as strings.
mod lenient_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&x.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A named output file.
#[derive(Clone, Debug)]
pub struct Output {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub outputs: Vec<Output>,
    pub runs: Vec<RunRecord>,
    pub checks: Vec<Check>,
}

impl Outcome {
    fn file(&mut self, name: &str, bytes: Vec<u8>) {
        self.outputs.push(Output { name: name.to_string(), bytes });
    }

    fn run(&mut self, label: impl Into<String>, status: RunStatus) {
        self.runs.push(RunRecord { label: label.into(), status });
    }

    /// Passes when `value <= limit`.
    fn at_most(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        let passed = value <= limit;
        self.checks.push(Check { name: name.into(), value, limit, passed });
    }

    /// Passes when `value >= limit`.
    fn at_least(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        let passed = value >= limit;
        self.checks.push(Check { name: name.into(), value, limit, passed });
    }

    fn holds(&mut self, name: impl Into<String>, ok: bool) {
        let v = if ok { 1.0 } else { 0.0 };
        self.checks.push(Check { name: name.into(), value: v, limit: 1.0, passed: ok });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed) && self.runs.iter().all(|r| r.status == RunStatus::Ok)
    }

    fn summary_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["check", "value", "limit", "passed"])?;
        for c in &self.checks {
            w.write_record([c.name.clone(), num(c.value), num(c.limit), c.passed.to_string()])?;
        }
        w.into_inner().map_err(|e| Error::Format(e.to_string()))
    }
}

pub struct Experiment {
    pub name: &'static str,
    pub about: &'static str,
    /// Adjusts the generic defaults to the experiment's own defaults.
    pub defaults: fn(&mut ExperimentConfig),
    pub run: fn(&ExperimentConfig) -> Result<Outcome>,
}

pub const EXPERIMENTS: &[Experiment] = &[
    Experiment {
        name: "tg_stationarity",
        about: "Taylor-Green under the Galerkin-truncated Euler system stays put",
        defaults: |_| {},
        run: tg_stationarity,
    },
    Experiment {
        name: "ns_decay",
        about: "Taylor-Green decays like exp(-2 nu t) under Navier-Stokes; energy balance",
        defaults: |c| c.scheme.nu = vec![0.1],
        run: ns_decay,
    },
    Experiment {
        name: "energy_conservation",
        about: "Galerkin-Euler energy drift at dt and dt/2 from random data",
        defaults: |c| {
            // large enough that the drift clears roundoff at dt = 1e-3
            c.initial.kind = InitialKind::Random;
            c.initial.band = 16;
            c.initial.l2_norm = 16.0 * std::f64::consts::PI;
        },
        run: energy_conservation,
    },
    Experiment {
        name: "vanishing_viscosity",
        about: "dissipation and sup-gap columns as nu -> 0",
        defaults: |c| {
            c.grid.n = 32;
            c.scheme.nu = (0..5).map(|m| 0.1 * 0.5f64.powi(m)).collect();
            c.scheme.max_n = Some(128);
            c.time.save_every = 10;
        },
        run: vanishing_viscosity,
    },
    Experiment {
        name: "galerkin_convergence",
        about: "sup-t L2 error of Galerkin truncations against a finer reference",
        defaults: |c| {
            c.grid.n = 192;
            c.time.t_end = 0.5;
            c.time.dt = 2e-3;
            c.time.save_every = 5;
            c.scheme.galerkin_n = vec![8, 16, 32];
            c.scheme.reference_n = Some(64);
            c.scheme.runs = 5;
            c.initial.kind = InitialKind::Random;
            c.initial.band = 24;
        },
        run: galerkin_convergence,
    },
    Experiment {
        name: "weak_strong",
        about: "weak-strong stability inequality on perturbed random pairs",
        defaults: |c| {
            c.grid.n = 32;
            c.time.dt = 5e-3;
            c.time.save_every = 2;
            c.scheme.runs = 20;
            c.scheme.eps = vec![1e-2, 1e-3];
            c.initial.kind = InitialKind::Random;
            c.initial.band = 6;
        },
        run: weak_strong,
    },
    Experiment {
        name: "rlf_certification",
        about: "frozen Taylor-Green flow: inverse residual, compressibility, stream function",
        defaults: |c| {
            c.grid.n = 16;
            c.flow.m = 128;
            c.flow.dt = 1e-3;
        },
        run: rlf_certification,
    },
    Experiment {
        name: "transport",
        about: "scalar pushforward under frozen shear and the renormalization residual",
        defaults: |c| {
            c.grid.n = 64;
            c.flow.dt = 1e-2;
            c.initial.kind = InitialKind::Shear;
        },
        run: transport,
    },
    Experiment {
        name: "scalar_vanishing_diffusivity",
        about: "diffusive dissipation of sin x2 under frozen shear as kappa -> 0",
        defaults: |c| {
            c.grid.n = 32;
            c.scheme.kappa = (0..5).map(|m| 0.1 * 0.5f64.powi(m)).collect();
            c.initial.kind = InitialKind::Shear;
        },
        run: scalar_vanishing_diffusivity,
    },
    Experiment {
        name: "flow_gronwall",
        about: "flow distance against the Gronwall bound for nearby velocity pairs",
        defaults: |c| {
            c.grid.n = 32;
            c.flow.m = 32;
            c.flow.dt = 1e-2;
            c.time.dt = 5e-3;
            c.time.save_every = 2;
            c.scheme.runs = 3;
            c.scheme.eps = vec![1e-2, 1e-3];
            c.initial.band = 6;
        },
        run: flow_gronwall,
    },
    Experiment {
        name: "jensen_gap",
        about: "Jensen gap of random finite ensembles of Euler paths",
        defaults: |c| {
            c.grid.n = 16;
            c.time.t_end = 0.05;
            c.time.dt = 1e-2;
            c.time.save_every = 1;
            c.scheme.runs = 100;
            c.initial.kind = InitialKind::Random;
            c.initial.band = 4;
        },
        run: jensen_gap_experiment,
    },
    Experiment {
        name: "growth_calibration",
        about: "calibrate the growth-bound constant and test it on held-out runs",
        defaults: |c| {
            c.time.dt = 2.5e-3;
            c.time.save_every = 4;
            c.scheme.runs = 10;
            c.scheme.holdout = 20;
            c.initial.kind = InitialKind::Random;
        },
        run: growth_calibration,
    },
    Experiment {
        name: "radii",
        about: "residual-set radii for Taylor-Green and random data over C and k",
        defaults: |c| {
            c.grid.n = 32;
            c.scheme.runs = 3;
            c.bounds.c = vec![0.01, 0.1, 1.0];
            c.bounds.k = vec![1, 2, 4];
            c.initial.band = 6;
        },
        run: radii,
    },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.name == name)
}

/// Default configuration of a named experiment.
pub fn default_config(name: &str) -> Result<ExperimentConfig> {
    let e = find(name).ok_or_else(|| Error::Config(format!("unknown experiment '{name}'")))?;
    let mut c = ExperimentConfig::named(name);
    (e.defaults)(&mut c);
    Ok(c)
}

/// Runs the experiment named in `cfg` and appends a `summary.csv` of checks.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let e = find(&cfg.experiment).expect("validated");
    let mut out = (e.run)(cfg)?;
    let summary = out.summary_csv()?;
    out.file("summary.csv", summary);
    Ok(out)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| Error::Format(e.to_string()))
}

fn grid(cfg: &ExperimentConfig) -> Result<Arc<FourierGrid>> {
    FourierGrid::new(cfg.grid.n)
}

fn initial_velocity(cfg: &ExperimentConfig, g: &Arc<FourierGrid>, seed: u64) -> Result<SpectralVector> {
    match cfg.initial.kind {
        InitialKind::TaylorGreen => Ok(init::taylor_green(g)),
        InitialKind::Shear => Ok(init::shear(g)),
        InitialKind::Random => init::random_velocity(g, cfg.initial.spectrum(), seed),
    }
}

fn run_opts(cfg: &ExperimentConfig) -> RunOptions {
    RunOptions { save_every: cfg.time.save_every }
}

fn snapshot_bytes(t: f64, u: &SpectralVector) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    Snapshot::velocity(t, u)?.write(&mut buf)?;
    Ok(buf)
}

fn diagnostics_bytes(path: &SolutionPath) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    diagnostics(path).write_csv(&mut buf)?;
    Ok(buf)
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn sup_distance(a: &SolutionPath, b: &SolutionPath) -> Result<f64> {
    a.check_compatible(b)?;
    let mut sup: f64 = 0.0;
    for (x, y) in a.states().iter().zip(b.states()) {
        sup = sup.max(vector_norm(&x.sub(y)?, NormKind::L2)?);
    }
    Ok(sup)
}

fn galerkin_n(cfg: &ExperimentConfig, g: &FourierGrid) -> usize {
    cfg.scheme.galerkin_n.first().copied().unwrap_or(g.dealias_cutoff())
}

fn tg_stationarity(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = grid(cfg)?;
    let u0 = init::taylor_green(&g);
    let spec = SystemSpec::EulerGalerkin { n: galerkin_n(cfg, &g) };
    let path = run_velocity(&spec, &u0, cfg.time.t_end, cfg.time.dt, run_opts(cfg))?;
    let norm0 = vector_norm(&u0, NormKind::L2)?;
    let mut out = Outcome::default();
    out.run("taylor_green", RunStatus::Ok);
    let drift = path
        .states()
        .iter()
        .map(|u| vector_norm(&u.sub(&u0)?, NormKind::L2).map(|d| d / norm0))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.at_most("relative_drift", drift, cfg.tol("drift", 1e-8));
    out.file("diagnostics.csv", diagnostics_bytes(&path)?);
    out.file("final_velocity.bin", snapshot_bytes(path.final_time(), path.last())?);
    Ok(out)
}

fn ns_decay(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = grid(cfg)?;
    let u0 = init::taylor_green(&g);
    let nu = cfg.scheme.nu.first().copied().unwrap_or(0.1);
    let t = cfg.time.t_end;
    let path = run_velocity(&SystemSpec::NavierStokes { nu }, &u0, t, cfg.time.dt, run_opts(cfg))?;
    let e0 = vector_norm(&u0, NormKind::L2)?;
    let mut out = Outcome::default();
    out.run(format!("nu={nu}"), RunStatus::Ok);
    let ratio = vector_norm(path.last(), NormKind::L2)? / (e0 * (-2.0 * nu * t).exp());
    out.at_most("decay_relative_error", (ratio - 1.0).abs(), cfg.tol("decay", 1e-7));
    // balance residual from every step, not only the stored ones
    let fine = run_velocity(&SystemSpec::NavierStokes { nu }, &u0, t, cfg.time.dt, RunOptions::default())?;
    let residual = diagnostics(&fine).max_abs_balance_residual() / (e0 * e0);
    out.at_most("balance_residual", residual, cfg.tol("balance", 1e-7));
    out.file("diagnostics.csv", diagnostics_bytes(&path)?);
    out.file("final_velocity.bin", snapshot_bytes(t, path.last())?);
    Ok(out)
}

fn energy_conservation(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = grid(cfg)?;
    let u0 = initial_velocity(cfg, &g, cfg.seed)?;
    let n = galerkin_n(cfg, &g);
    let u0 = galerkin_project(&u0, n)?;
    let spec = SystemSpec::EulerGalerkin { n };
    let dt = cfg.time.dt;
    let drifts = par::map_slice(&[dt, 0.5 * dt], |&h| -> Result<(f64, SolutionPath)> {
        let every = if h < dt { 2 * cfg.time.save_every } else { cfg.time.save_every };
        let p = run_velocity(&spec, &u0, cfg.time.t_end, h, RunOptions { save_every: every })?;
        Ok((diagnostics(&p).max_relative_energy_drift(), p))
    });
    let mut res = Vec::new();
    for d in drifts {
        res.push(d?);
    }
    let mut out = Outcome::default();
    out.run(format!("dt={dt}"), RunStatus::Ok);
    out.run(format!("dt={}", 0.5 * dt), RunStatus::Ok);
    let (d1, d2) = (res[0].0, res[1].0);
    out.at_most("relative_energy_drift", d1, cfg.tol("drift", 1e-9));
    out.at_least("drift_ratio_halving_dt", d1 / d2, cfg.tol("ratio", 16.0));
    out.file(
        "energy_drift.csv",
        csv_bytes(&["dt", "relative_energy_drift"], [vec![num(dt), num(d1)], vec![num(0.5 * dt), num(d2)]])?,
    );
    out.file("diagnostics.csv", diagnostics_bytes(&res[0].1)?);
    Ok(out)
}

fn full_dissipation_csv(rows: &[DissipationRow]) -> Result<Vec<u8>> {
    csv_bytes(
        &["nu", "n", "sup_gap", "dissipation", "balance_residual", "capped", "resolved"],
        rows.iter().map(|r| {
            vec![
                num(r.nu),
                r.n.to_string(),
                num(r.sup_gap),
                num(r.dissipation),
                num(r.balance_residual),
                r.capped.to_string(),
                r.resolved.to_string(),
            ]
        }),
    )
}

fn record_rows(out: &mut Outcome, rows: &[DissipationRow], symbol: &str) {
    for r in rows {
        let status = if r.resolved { RunStatus::Ok } else { RunStatus::Unresolved };
        out.run(format!("{symbol}={}", r.nu), status);
    }
}

fn vanishing_viscosity(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = grid(cfg)?;
    let u0 = initial_velocity(cfg, &g, cfg.seed)?;
    let nus = &cfg.scheme.nu;
    if nus.is_empty() {
        return Err(Error::Config("scheme.nu must list at least one viscosity".into()));
    }
    let schedule = ResolutionSchedule {
        base_n: g.n(),
        base_nu: nus[0],
        max_n: cfg.scheme.max_n.unwrap_or(g.n()).max(g.n()),
    };
    let opts = SeriesOptions { save_every: cfg.time.save_every, residual_threshold: cfg.tol("balance", 1e-6) };
    let rows = anomalous_dissipation_series(&u0, nus, cfg.time.t_end, cfg.time.dt, schedule, opts)?;
    let mut out = Outcome::default();
    record_rows(&mut out, &rows, "nu");
    if cfg.initial.kind == InitialKind::TaylorGreen {
        let e0 = vector_norm(&u0, NormKind::L2)?.powi(2);
        let worst = rows
            .iter()
            .map(|r| {
                let closed = 0.5 * e0 * (1.0 - (-4.0 * r.nu * cfg.time.t_end).exp());
                (r.dissipation - closed).abs() / closed
            })
            .fold(0.0, f64::max);
        out.at_most("dissipation_closed_form", worst, cfg.tol("closed_form", 1e-6));
    }
    let gaps: Vec<f64> = rows.iter().map(|r| r.sup_gap).collect();
    let diss: Vec<f64> = rows.iter().map(|r| r.dissipation).collect();
    out.holds("sup_gap_decreasing", strictly_decreasing(&gaps));
    out.holds("dissipation_decreasing", strictly_decreasing(&diss));
    let mut buf = Vec::new();
    write_dissipation_csv(&mut buf, &rows)?;
    out.file("dissipation.csv", buf);
    out.file("dissipation_runs.csv", full_dissipation_csv(&rows)?);
    Ok(out)
}

fn galerkin_convergence(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = grid(cfg)?;
    let n_ref = cfg.scheme.reference_n.unwrap_or(g.dealias_cutoff());
    let ns = &cfg.scheme.galerkin_n;
    if ns.is_empty() {
        return Err(Error::Config("scheme.galerkin_n must not be empty".into()));
    }
    let seeds: Vec<u64> = (0..cfg.scheme.runs as u64).map(|i| cfg.seed + i).collect();
    let per_seed = par::map_slice(&seeds, |&seed| -> Result<Vec<f64>> {
        let u0 = initial_velocity(cfg, &g, seed)?;
        let reference = run_velocity(
            &SystemSpec::EulerGalerkin { n: n_ref },
            &galerkin_project(&u0, n_ref)?,
            cfg.time.t_end,
            cfg.time.dt,
            run_opts(cfg),
        )?;
        ns.iter()
            .map(|&n| {
                let p = run_velocity(
                    &SystemSpec::EulerGalerkin { n },
                    &galerkin_project(&u0, n)?,
                    cfg.time.t_end,
                    cfg.time.dt,
                    run_opts(cfg),
                )?;
                sup_distance(&p, &reference)
            })
            .collect()
    });
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for (seed, errs) in seeds.iter().zip(per_seed) {
        let errs = errs?;
        out.run(format!("seed={seed}"), RunStatus::Ok);
        out.holds(format!("seed_{seed}_errors_decreasing"), strictly_decreasing(&errs));
        for (n, e) in ns.iter().zip(&errs) {
            rows.push(vec![seed.to_string(), n.to_string(), num(*e)]);
        }
    }
    out.file("galerkin.csv", csv_bytes(&["seed", "n", "sup_error"], rows)?);
    Ok(out)
}

/// Perturbation direction for pair experiments, normalized to `||u0||`.
fn perturbation(cfg: &ExperimentConfig, g: &Arc<FourierGrid>, seed: u64, like: &SpectralVector) -> Result<SpectralVector> {
    let mut spec = cfg.initial.spectrum();
    spec.l2_norm = vector_norm(like, NormKind::L2)?;
    init::random_velocity(g, spec, seed.wrapping_add(0x5eed_0000))
}

fn weak_strong(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = grid(cfg)?;
    let spec = SystemSpec::EulerGalerkin { n: galerkin_n(cfg, &g) };
    let n = galerkin_n(cfg, &g);
    let cases: Vec<(u64, f64)> =
        (0..cfg.scheme.runs as u64).flat_map(|i| cfg.scheme.eps.iter().map(move |&e| (cfg.seed + i, e))).collect();
    let reports = par::map_slice(&cases, |&(seed, eps)| {
        let v0 = galerkin_project(&initial_velocity(cfg, &g, seed)?, n)?;
        let delta = galerkin_project(&perturbation(cfg, &g, seed, &v0)?, n)?;
        let u0 = v0.combine(1.0, &delta, eps)?;
        let v = run_velocity(&spec, &v0, cfg.time.t_end, cfg.time.dt, run_opts(cfg))?;
        let u = run_velocity(&spec, &u0, cfg.time.t_end, cfg.time.dt, run_opts(cfg))?;
        weak_strong_report(&u, &v)
    });
    let mut out = Outcome::default();
    let mut all = Vec::new();
    for ((seed, eps), r) in cases.iter().zip(reports) {
        let r = r?;
        out.run(format!("seed={seed},eps={eps}"), RunStatus::Ok);
        out.holds(format!("seed_{seed}_eps_{eps}_satisfied"), r.satisfied);
        out.holds(format!("seed_{seed}_eps_{eps}_dissipative"), r.dissipative_satisfied);
        all.push(r);
    }
    let mut buf = Vec::new();
    write_stability_csv(&mut buf, &all)?;
    out.file("stability.csv", buf);
    let pairs = cases.iter().zip(&all).map(|((seed, eps), r)| {
        vec![
            seed.to_string(),
            num(*eps),
            num(r.lhs),
            num(r.rhs),
            r.satisfied.to_string(),
            num(r.dissipative_lhs),
            num(r.dissipative_rhs),
            r.dissipative_satisfied.to_string(),
        ]
    });
    out.file(
        "stability_pairs.csv",
        csv_bytes(
            &["seed", "eps", "lhs", "rhs", "satisfied", "dissipative_lhs", "dissipative_rhs", "dissipative_satisfied"],
            pairs,
        )?,
    );
    Ok(out)
}

fn rlf_certification(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = grid(cfg)?;
    let src = FrozenVelocity::new(init::taylor_green(&g));
    let steps = crate::dynamics::step_count(cfg.time.t_end, cfg.flow.dt)?;
    let opts = FlowOptions { dt: cfg.flow.dt, record_every: (steps / 10).max(1) };
    let m = cfg.flow.m;
    let volume = VolumeOptions { cells: cfg.flow.cells, ..Default::default() };
    let (flow, q) = certify(&src, m, cfg.time.t_end, opts, volume)?;
    let psi = |x: [f64; 2]| -x[0].sin() * x[1].sin();
    let psi_drift = flow
        .positions()
        .iter()
        .flat_map(|pos| pos.iter().zip(flow.seeds()).map(|(x, s)| (psi(*x) - psi(*s)).abs()))
        .fold(0.0, f64::max);
    let mut out = Outcome::default();
    out.run(format!("M={m}"), RunStatus::Ok);
    out.at_most("inverse_residual", q.inverse_residual, cfg.tol("inverse", 1e-8));
    let slack = cfg.tol("compressibility_cells", 8.0) / m as f64;
    out.at_most("compressibility_upper", q.compressibility, 1.0 + slack);
    out.at_least("compressibility_lower", q.compressibility, 1.0 - slack);
    out.at_most("stream_function_drift", psi_drift, cfg.tol("stream_function", 1e-6));
    out.file(
        "flow_quality.csv",
        csv_bytes(
            &["M", "cells", "T", "dt", "compressibility", "inverse_residual", "stream_function_drift"],
            [vec![m.to_string(), cfg.flow.cells.min(m).to_string(), num(cfg.time.t_end), num(cfg.flow.dt), num(q.compressibility), num(q.inverse_residual), num(psi_drift)]],
        )?,
    );
    let mut buf = Vec::new();
    flow.endpoints().write_csv(&mut buf)?;
    out.file("flow.csv", buf);
    out.file("flow_manifest.json", serde_json::to_vec_pretty(&flow.manifest(cfg.flow.dt))?);
    Ok(out)
}

fn transport(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = grid(cfg)?;
    let src = FrozenVelocity::new(init::shear(&g));
    let rho0 = PhysicalScalar::from_fn(&g, |x1, _| x1.sin()).to_spectral();
    let back = integrate_flow(
        &src,
        &seed_grid(g.n()),
        cfg.time.t_end,
        FlowOptions { dt: cfg.flow.dt, record_every: 1 },
        Direction::Backward,
    )?;
    let path = pushforward(&rho0, &back)?;
    let l2_0 = scalar_norm(&rho0, NormKind::L2)?;
    let mut rows = Vec::new();
    let (mut worst_err, mut worst_l2): (f64, f64) = (0.0, 0.0);
    for (t, s) in path.times().iter().zip(path.states()) {
        let exact = PhysicalScalar::from_fn(&g, |x1, x2| (x1 - t * x2.sin()).sin());
        let err = s
            .to_physical()?
            .samples()
            .iter()
            .zip(exact.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let l2 = scalar_norm(s, NormKind::L2)?;
        worst_err = worst_err.max(err);
        worst_l2 = worst_l2.max((l2 - l2_0).abs() / l2_0);
        rows.push(vec![
            num(*t),
            num(scalar_norm(s, NormKind::Lp(1.0))?),
            num(l2),
            num(scalar_norm(s, NormKind::Lp(4.0))?),
            num(err),
        ]);
    }
    let residual = renormalize_check(&path, &Renormalizer::clamp(1.0), &src)?;
    let mut out = Outcome::default();
    out.run("shear", RunStatus::Ok);
    out.at_most("pushforward_error", worst_err, cfg.tol("pointwise", 1e-8));
    out.at_most("l2_conservation", worst_l2, cfg.tol("l2", 1e-8));
    out.at_most("renormalization_residual", residual, cfg.tol("renormalization", 1e-6));
    out.file("transport.csv", csv_bytes(&["time", "l1", "l2", "l4", "max_error"], rows)?);
    Ok(out)
}

fn scalar_vanishing_diffusivity(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = grid(cfg)?;
    let src: Arc<dyn VelocitySource> = Arc::new(FrozenVelocity::new(init::shear(&g)));
    let rho0 = PhysicalScalar::from_fn(&g, |_, x2| x2.sin()).to_spectral();
    let kappas = &cfg.scheme.kappa;
    if kappas.is_empty() {
        return Err(Error::Config("scheme.kappa must list at least one diffusivity".into()));
    }
    let opts = SeriesOptions { save_every: cfg.time.save_every, residual_threshold: cfg.tol("balance", 1e-6) };
    let rows = scalar_dissipation_series(&rho0, src, kappas, cfg.time.t_end, cfg.time.dt, opts)?;
    let e0 = scalar_norm(&rho0, NormKind::L2)?.powi(2);
    let t = cfg.time.t_end;
    let mut out = Outcome::default();
    record_rows(&mut out, &rows, "kappa");
    let worst = rows
        .iter()
        .map(|r| {
            let closed = 0.5 * e0 * (1.0 - (-2.0 * r.nu * t).exp());
            (r.dissipation - closed).abs() / closed
        })
        .fold(0.0, f64::max);
    out.at_most("dissipation_closed_form", worst, cfg.tol("closed_form", 1e-6));
    let diss: Vec<f64> = rows.iter().map(|r| r.dissipation).collect();
    out.holds("dissipation_decreasing", strictly_decreasing(&diss));
    // linear vanishing: dissipation / kappa tends to ||rho_0||^2 T
    let last = rows.last().unwrap();
    out.at_most("linear_rate", (last.dissipation / (last.nu * e0 * t) - 1.0).abs(), last.nu * t * 1.01);
    let mut buf = Vec::new();
    write_dissipation_csv(&mut buf, &rows)?;
    out.file("dissipation.csv", buf);
    Ok(out)
}

fn flow_gronwall(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = grid(cfg)?;
    let t = cfg.time.t_end;
    let m = cfg.flow.m;
    let seeds = seed_grid(m);
    let steps = crate::dynamics::step_count(t, cfg.flow.dt)?;
    let fopts = FlowOptions { dt: cfg.flow.dt, record_every: 1.max(steps / 20) };
    let n = g.dealias_cutoff();

    // frozen pairs around Taylor-Green and shear, and evolving Euler pairs
    let mut cases: Vec<(String, Arc<dyn VelocitySource>, Arc<dyn VelocitySource>, usize)> = Vec::new();
    for &eps in &cfg.scheme.eps {
        for (name, base) in [("taylor_green", init::taylor_green(&g)), ("shear", init::shear(&g))] {
            let delta = galerkin_project(&perturbation(cfg, &g, cfg.seed, &base)?, n)?;
            let v = base.combine(1.0, &delta, eps)?;
            cases.push((
                format!("{name}_eps_{eps}"),
                Arc::new(FrozenVelocity::new(base)),
                Arc::new(FrozenVelocity::new(v)),
                steps,
            ));
        }
        for i in 0..cfg.scheme.runs as u64 {
            let seed = cfg.seed + i;
            let mut rcfg = cfg.clone();
            rcfg.initial.kind = InitialKind::Random;
            let u0 = galerkin_project(&initial_velocity(&rcfg, &g, seed)?, n)?;
            let delta = galerkin_project(&perturbation(&rcfg, &g, seed, &u0)?, n)?;
            let v0 = u0.combine(1.0, &delta, eps)?;
            let spec = SystemSpec::EulerGalerkin { n };
            let u = run_velocity(&spec, &u0, t, cfg.time.dt, run_opts(cfg))?;
            let v = run_velocity(&spec, &v0, t, cfg.time.dt, run_opts(cfg))?;
            let samples = u.len() - 1;
            cases.push((format!("euler_seed_{seed}_eps_{eps}"), Arc::new(u), Arc::new(v), samples));
        }
    }
    let results = par::map_slice(&cases, |(_, u, v, samples)| -> Result<(f64, f64)> {
        let x = integrate_flow(u.as_ref(), &seeds, t, fopts, Direction::Forward)?;
        let y = integrate_flow(v.as_ref(), &seeds, t, fopts, Direction::Forward)?;
        let d = flow_distance(&x, &y)?;
        let b = gronwall_bound(u.as_ref(), v.as_ref(), t, (*samples).max(1))?;
        Ok((d, b))
    });
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for ((name, ..), r) in cases.iter().zip(results) {
        let (d, b) = r?;
        out.run(name.clone(), RunStatus::Ok);
        out.at_most(format!("{name}_distance_over_bound"), d / b, 1.0);
        rows.push(vec![name.clone(), num(d), num(b), (d <= b).to_string()]);
    }
    out.file("gronwall.csv", csv_bytes(&["pair", "flow_distance", "bound", "satisfied"], rows)?);
    Ok(out)
}

fn jensen_gap_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    use rand::{Rng, SeedableRng};
    let g = grid(cfg)?;
    let n = g.dealias_cutoff();
    let spec = SystemSpec::EulerGalerkin { n };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let ensembles: Vec<Vec<u64>> = (0..cfg.scheme.runs)
        .map(|i| {
            // every fifth ensemble is a singleton
            let size = if i % 5 == 0 { 1 } else { rng.random_range(2..=6) };
            (0..size).map(|_| rng.random::<u32>() as u64).collect()
        })
        .collect();
    let results = par::map_slice(&ensembles, |members| -> Result<(f64, f64)> {
        let paths = members
            .iter()
            .map(|&s| {
                let u0 = galerkin_project(&initial_velocity(cfg, &g, s)?, n)?;
                run_velocity(&spec, &u0, cfg.time.t_end, cfg.time.dt, run_opts(cfg))
            })
            .collect::<Result<Vec<_>>>()?;
        let gap = jensen_gap(&paths)?;
        let last: Vec<&SpectralVector> = paths.iter().map(|p| p.last()).collect();
        Ok((gap, ensemble_variance(&last)?))
    });
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    let (mut min_gap, mut singleton_max): (f64, f64) = (f64::INFINITY, 0.0);
    for (i, (members, r)) in ensembles.iter().zip(results).enumerate() {
        let (gap, var) = r?;
        if members.len() == 1 {
            singleton_max = singleton_max.max(gap.abs());
        } else {
            min_gap = min_gap.min(gap);
        }
        rows.push(vec![i.to_string(), members.len().to_string(), num(gap), num(var)]);
    }
    out.run(format!("{} ensembles", ensembles.len()), RunStatus::Ok);
    out.at_least("min_gap", min_gap, 0.0);
    out.at_most("singleton_gap", singleton_max, cfg.tol("singleton", 1e-12));
    out.file("jensen.csv", csv_bytes(&["ensemble", "size", "gap", "final_variance"], rows)?);
    Ok(out)
}

fn growth_calibration(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = grid(cfg)?;
    let n = g.dealias_cutoff();
    let spec = SystemSpec::EulerGalerkin { n };
    let s = cfg.bounds.s;
    let total = cfg.scheme.runs + cfg.scheme.holdout;
    let seeds: Vec<u64> = (0..total as u64).map(|i| cfg.seed + i).collect();
    let samples = par::map_slice(&seeds, |&seed| -> Result<GrowthSample> {
        let u0 = galerkin_project(&initial_velocity(cfg, &g, seed)?, n)?;
        let p = run_velocity(&spec, &u0, cfg.time.t_end, cfg.time.dt, run_opts(cfg))?;
        GrowthSample::measure(&p, s)
    });
    let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;
    let (train, held) = samples.split_at(cfg.scheme.runs);
    let c_star = calibrate_constant(train)?;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, (seed, smp)) in seeds.iter().zip(&samples).enumerate() {
        let role = if i < train.len() { "train" } else { "holdout" };
        let ratio = smp.worst_ratio(c_star);
        if i >= train.len() {
            worst = worst.max(ratio);
        }
        out.run(format!("{role}_seed={seed}"), RunStatus::Ok);
        rows.push(vec![
            role.to_string(),
            seed.to_string(),
            num(smp.data.vorticity_sup),
            num(smp.data.hs_norm),
            num(smp.required_constant()),
            num(ratio),
        ]);
    }
    if !held.is_empty() {
        out.at_most("holdout_worst_ratio", worst, 1.0);
    }
    out.file(
        "calibration.csv",
        csv_bytes(
            &["train_runs", "holdout_runs", "s", "T", "calibrated_c", "holdout_worst_ratio"],
            [vec![
                train.len().to_string(),
                held.len().to_string(),
                num(s),
                num(cfg.time.t_end),
                num(c_star),
                num(worst),
            ]],
        )?,
    );
    out.file(
        "growth.csv",
        csv_bytes(&["role", "seed", "vorticity_sup", "hs_norm", "required_c", "worst_ratio"], rows)?,
    );
    Ok(out)
}

fn radii(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = grid(cfg)?;
    let mut fields = vec![("taylor_green".to_string(), init::taylor_green(&g))];
    let mut rcfg = cfg.clone();
    rcfg.initial.kind = InitialKind::Random;
    for i in 0..cfg.scheme.runs as u64 {
        fields.push((format!("random_{}", cfg.seed + i), initial_velocity(&rcfg, &g, cfg.seed + i)?));
    }
    let variant = if cfg.bounds.doubled { RadiusVariant::Doubled } else { RadiusVariant::Single };
    let mut rows = Vec::new();
    let mut out = Outcome::default();
    for (id, phi) in &fields {
        let mut by_c = Vec::new();
        for &c in &cfg.bounds.c {
            let mut by_k = Vec::new();
            for &k in &cfg.bounds.k {
                let p = BoundParams { c, s: cfg.bounds.s, t: cfg.time.t_end, k };
                let (radius, log_radius) = residual_radius(phi, &p, variant)?;
                by_k.push(log_radius);
                rows.push(RadiusRow { phi_id: id.clone(), k, t: p.t, c, radius, log_radius });
            }
            out.holds(format!("{id}_c_{c}_decreasing_in_k"), strictly_decreasing(&by_k));
            by_c.push(by_k[0]);
        }
        out.holds(format!("{id}_decreasing_in_c"), strictly_decreasing(&by_c));
        out.run(id.clone(), RunStatus::Ok);
    }
    let mut buf = Vec::new();
    write_radii_csv(&mut buf, &rows)?;
    out.file("radii.csv", buf);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_are_unique_and_defaults_validate() {
        for e in EXPERIMENTS {
            assert_eq!(find(e.name).unwrap().name, e.name);
            default_config(e.name).unwrap().validate().unwrap();
        }
        assert!(find("nope").is_none());
        assert!(default_config("nope").is_err());
    }

    #[test]
    fn non_finite_checks_round_trip() {
        let c = Check { name: "x".into(), value: f64::NAN, limit: f64::INFINITY, passed: false };
        let back: Check = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert!(back.value.is_nan());
        assert_eq!(back.limit, f64::INFINITY);
    }

    #[test]
    fn outcome_pass_logic() {
        let mut o = Outcome::default();
        o.at_most("a", 1.0, 2.0);
        o.at_least("b", 3.0, 2.0);
        o.run("r", RunStatus::Ok);
        assert!(o.passed());
        o.run("s", RunStatus::Unresolved);
        assert!(!o.passed());
        let mut o = Outcome::default();
        o.holds("c", false);
        assert!(!o.passed());
    }

    #[test]
    fn fast_runs_are_deterministic() {
        let mut cfg = default_config("jensen_gap").unwrap();
        cfg.scheme.runs = 6;
        let a = execute(&cfg).unwrap();
        let b = execute(&cfg).unwrap();
        assert_eq!(a.outputs.len(), b.outputs.len());
        for (x, y) in a.outputs.iter().zip(&b.outputs) {
            assert_eq!(x.name, y.name);
            assert_eq!(x.bytes, y.bytes);
        }
    }
}
