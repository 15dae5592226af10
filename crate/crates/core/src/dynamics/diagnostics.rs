use std::io::Write;

use super::path::{ScalarPath, SolutionPath};
use crate::error::Result;
use crate::spectral::{gradient_energy, scalar_gradient_energy, scalar_norm, vector_norm, NormKind, SpectralScalar, SpectralVector};

/// Exact CSV header of the diagnostics table.
pub const DIAGNOSTIC_HEADER: [&str; 5] = ["time", "energy", "enstrophy", "dissipation_running", "balance_residual"];

/// Conservation diagnostics along a path.
///
/// For velocity paths `energy = ||u||^2`, `enstrophy = ||omega||^2` and the
/// dissipation is `nu int_0^t ||grad u||^2`. For scalar paths `energy = ||rho||^2`,
/// `enstrophy = ||grad rho||^2` and the dissipation uses `kappa`. In both cases
/// `balance_residual = energy/2 + dissipation - energy_0/2`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticSeries {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub enstrophy: Vec<f64>,
    pub dissipation_running: Vec<f64>,
    pub balance_residual: Vec<f64>,
}

impl DiagnosticSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max_t |energy(t) - energy(0)| / energy(0)`.
    pub fn max_relative_energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        self.energy.iter().map(|e| (e - e0).abs() / e0).fold(0.0, f64::max)
    }

    pub fn max_abs_balance_residual(&self) -> f64 {
        self.balance_residual.iter().map(|r| r.abs()).fold(0.0, f64::max)
    }

    /// Writes the table with 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(DIAGNOSTIC_HEADER)?;
        for i in 0..self.len() {
            wr.write_record(
                [self.times[i], self.energy[i], self.enstrophy[i], self.dissipation_running[i], self.balance_residual[i]]
                    .iter()
                    .map(|v| format!("{v:.16e}")),
            )?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Streaming version of [`diagnostics`] for runs that do not store states.
#[derive(Clone, Debug)]
pub struct DiagnosticAccumulator {
    diffusion: f64,
    dt: f64,
    last_grad: f64,
    series: DiagnosticSeries,
}

impl DiagnosticAccumulator {
    /// `diffusion` is `nu` or `kappa`; `dt` the spacing of pushed samples.
    pub fn new(diffusion: f64, dt: f64) -> Self {
        Self { diffusion, dt, last_grad: 0.0, series: DiagnosticSeries::default() }
    }

    /// Pushes one sample: `energy`, `enstrophy` and `grad_sq = ||grad f||^2`.
    pub fn push(&mut self, t: f64, energy: f64, enstrophy: f64, grad_sq: f64) {
        let s = &mut self.series;
        let diss = match s.dissipation_running.last() {
            None => 0.0,
            Some(prev) => prev + self.diffusion * 0.5 * self.dt * (self.last_grad + grad_sq),
        };
        self.last_grad = grad_sq;
        let e0 = *s.energy.first().unwrap_or(&energy);
        s.times.push(t);
        s.energy.push(energy);
        s.enstrophy.push(enstrophy);
        s.dissipation_running.push(diss);
        s.balance_residual.push(0.5 * energy + diss - 0.5 * e0);
    }

    pub fn push_velocity(&mut self, t: f64, u: &SpectralVector) {
        let energy = vector_norm(u, NormKind::L2).expect("L2 is always valid").powi(2);
        let grad = gradient_energy(u);
        let enstrophy = scalar_norm(&crate::spectral::curl2d(u), NormKind::L2).expect("valid").powi(2);
        self.push(t, energy, enstrophy, grad);
    }

    pub fn push_scalar(&mut self, t: f64, rho: &SpectralScalar) {
        let energy = scalar_norm(rho, NormKind::L2).expect("valid").powi(2);
        let grad = scalar_gradient_energy(rho);
        self.push(t, energy, grad, grad);
    }

    pub fn finish(self) -> DiagnosticSeries {
        self.series
    }
}

pub fn diagnostics(path: &SolutionPath) -> DiagnosticSeries {
    let nu = path.spec().map_or(0.0, |s| s.viscosity());
    let mut acc = DiagnosticAccumulator::new(nu, path.dt());
    for (t, u) in path.times().iter().zip(path.states()) {
        acc.push_velocity(*t, u);
    }
    acc.finish()
}

pub fn scalar_diagnostics(path: &ScalarPath) -> DiagnosticSeries {
    let kappa = path.spec().map_or(0.0, |s| s.diffusivity());
    let mut acc = DiagnosticAccumulator::new(kappa, path.dt());
    for (t, r) in path.times().iter().zip(path.states()) {
        acc.push_scalar(*t, r);
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{run_velocity, RunOptions, SystemSpec};
    use crate::spectral::{init, FourierGrid};

    #[test]
    fn taylor_green_balance_closed_form() {
        let g = FourierGrid::new(16).unwrap();
        let tg = init::taylor_green(&g);
        let nu = 0.1;
        let path = run_velocity(&SystemSpec::NavierStokes { nu }, &tg, 1.0, 1e-3, RunOptions::default()).unwrap();
        let d = diagnostics(&path);
        let e0 = d.energy[0];
        assert!(d.max_abs_balance_residual() <= 1e-7 * e0);
        let closed = 0.5 * e0 * (1.0 - (-4.0 * nu).exp());
        assert!((d.dissipation_running.last().unwrap() - closed).abs() <= 1e-7 * closed);
        assert!(d.dissipation_running.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn csv_header_and_precision() {
        let mut acc = DiagnosticAccumulator::new(0.0, 0.1);
        acc.push(0.0, 1.0 / 3.0, 2.0, 2.0);
        let mut buf = Vec::new();
        acc.finish().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "time,energy,enstrophy,dissipation_running,balance_residual");
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[1], "3.3333333333333331e-1");
        assert_eq!(row[1].parse::<f64>().unwrap(), 1.0 / 3.0);
    }
}
