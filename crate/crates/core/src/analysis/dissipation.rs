use std::sync::Arc;

use crate::dynamics::{
    evolve, run_scalar, run_velocity, DiagnosticAccumulator, DiagnosticSeries, FlowState, RunOptions, SystemSpec,
    VelocitySource,
};
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{scalar_norm, vector_norm, FourierGrid, NormKind, SpectralScalar, SpectralVector};

/// Grid size as a function of viscosity: `N ~ base_n (base_nu / nu)^{1/2}`,
/// rounded up to a multiple of 8 and capped at `max_n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolutionSchedule {
    pub base_n: usize,
    pub base_nu: f64,
    pub max_n: usize,
}

impl ResolutionSchedule {
    /// A schedule that always uses `n`.
    pub fn fixed(n: usize) -> Self {
        Self { base_n: n, base_nu: 1.0, max_n: n }
    }

    /// `(N, capped)` for viscosity `nu`.
    pub fn grid_for(&self, nu: f64) -> (usize, bool) {
        let want = if nu > 0.0 { self.base_n as f64 * (self.base_nu / nu).sqrt().max(1.0) } else { f64::INFINITY };
        let want = if want.is_finite() { ((want / 8.0).ceil() as usize * 8).max(self.base_n) } else { usize::MAX };
        if want > self.max_n {
            (self.max_n, true)
        } else {
            (want, false)
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SeriesOptions {
    /// Spacing, in steps, of the states compared against the reference.
    /// Diagnostics always use every step.
    pub save_every: usize,
    /// Runs whose `max_t |balance_residual| / ||u_0||^2` exceeds this are
    /// flagged unresolved.
    pub residual_threshold: f64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { save_every: 1, residual_threshold: 1e-6 }
    }
}

/// One row of the dissipation table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DissipationRow {
    /// Viscosity or diffusivity.
    pub nu: f64,
    pub n: usize,
    /// `sup_t ||u^nu_t - u^0_t||_L2` against the inviscid reference.
    pub sup_gap: f64,
    /// `nu int_0^T ||grad u^nu||^2 dt`.
    pub dissipation: f64,
    /// `max_t |balance_residual| / ||u_0||^2`.
    pub balance_residual: f64,
    /// The schedule wanted a grid above its cap.
    pub capped: bool,
    pub resolved: bool,
}

fn row_from(nu: f64, n: usize, capped: bool, sup_gap: f64, d: &DiagnosticSeries, opts: &SeriesOptions) -> DissipationRow {
    let e0 = d.energy[0];
    let residual = if e0 > 0.0 { d.max_abs_balance_residual() / e0 } else { d.max_abs_balance_residual() };
    DissipationRow {
        nu,
        n,
        sup_gap,
        dissipation: *d.dissipation_running.last().unwrap(),
        balance_residual: residual,
        capped,
        resolved: residual <= opts.residual_threshold,
    }
}

/// Vanishing-viscosity table for velocity data `u0`: each `nu` is run with
/// Navier-Stokes on the scheduled grid and compared to a Galerkin-Euler
/// reference on the largest grid used.
pub fn anomalous_dissipation_series(
    u0: &SpectralVector,
    nus: &[f64],
    t_end: f64,
    dt: f64,
    schedule: ResolutionSchedule,
    opts: SeriesOptions,
) -> Result<Vec<DissipationRow>> {
    if nus.iter().any(|&nu| !(nu > 0.0)) {
        return Err(Error::InvalidParameter("viscosities must be positive".into()));
    }
    let plan: Vec<(f64, usize, bool)> = nus.iter().map(|&nu| {
        let (n, capped) = schedule.grid_for(nu);
        (nu, n, capped)
    }).collect();
    let n_ref = plan.iter().map(|p| p.1).max().unwrap_or(schedule.base_n);
    let ref_grid = FourierGrid::new(n_ref)?;
    let run_opts = RunOptions { save_every: opts.save_every.max(1) };
    let reference = run_velocity(
        &SystemSpec::EulerGalerkin { n: ref_grid.dealias_cutoff() },
        &u0.resample(&ref_grid),
        t_end,
        dt,
        run_opts,
    )?;
    let rows = par::map_slice(&plan, |&(nu, n, capped)| -> Result<DissipationRow> {
        let grid = FourierGrid::new(n)?;
        let spec = SystemSpec::NavierStokes { nu };
        let mut acc = DiagnosticAccumulator::new(nu, dt);
        let mut gap: f64 = 0.0;
        let mut failure = None;
        evolve(&spec, FlowState::Velocity(u0.resample(&grid)), t_end, dt, |step, t, state| {
            let u = state.velocity().expect("velocity system");
            acc.push_velocity(t, u);
            if step % run_opts.save_every == 0 && failure.is_none() {
                let diff = u.resample(&ref_grid).sub(&reference.states()[step / run_opts.save_every]);
                match diff.and_then(|d| vector_norm(&d, NormKind::L2)) {
                    Ok(v) => gap = gap.max(v),
                    Err(e) => failure = Some(e),
                }
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(row_from(nu, n, capped, gap, &acc.finish(), &opts))
    });
    rows.into_iter().collect()
}

/// Vanishing-diffusivity table for a scalar `rho0` advected by `velocity`,
/// compared to pure transport on the same grid.
pub fn scalar_dissipation_series(
    rho0: &SpectralScalar,
    velocity: Arc<dyn VelocitySource>,
    kappas: &[f64],
    t_end: f64,
    dt: f64,
    opts: SeriesOptions,
) -> Result<Vec<DissipationRow>> {
    let run_opts = RunOptions { save_every: opts.save_every.max(1) };
    let n = rho0.grid().n();
    let reference =
        run_scalar(&SystemSpec::AdvectionDiffusion { kappa: 0.0, velocity: velocity.clone() }, rho0, t_end, dt, run_opts)?;
    let rows = par::map_slice(kappas, |&kappa| -> Result<DissipationRow> {
        let spec = SystemSpec::AdvectionDiffusion { kappa, velocity: velocity.clone() };
        let mut acc = DiagnosticAccumulator::new(kappa, dt);
        let mut gap: f64 = 0.0;
        let mut failure = None;
        evolve(&spec, FlowState::Scalar(rho0.clone()), t_end, dt, |step, t, state| {
            let r = state.scalar().expect("scalar system");
            acc.push_scalar(t, r);
            if step % run_opts.save_every == 0 && failure.is_none() {
                match r.sub(&reference.states()[step / run_opts.save_every]).and_then(|d| scalar_norm(&d, NormKind::L2)) {
                    Ok(v) => gap = gap.max(v),
                    Err(e) => failure = Some(e),
                }
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(row_from(kappa, n, false, gap, &acc.finish(), &opts))
    });
    rows.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::FrozenVelocity;
    use crate::spectral::{init, PhysicalScalar};

    #[test]
    fn schedule_rounds_and_caps() {
        let s = ResolutionSchedule { base_n: 32, base_nu: 0.1, max_n: 64 };
        assert_eq!(s.grid_for(0.1), (32, false));
        assert_eq!(s.grid_for(0.05), (48, false));
        assert_eq!(s.grid_for(0.01), (64, true));
    }

    #[test]
    fn taylor_green_closed_forms() {
        let g = FourierGrid::new(16).unwrap();
        let tg = init::taylor_green(&g);
        let e0 = vector_norm(&tg, NormKind::L2).unwrap().powi(2);
        let rows =
            anomalous_dissipation_series(&tg, &[0.1, 0.05], 1.0, 0.01, ResolutionSchedule::fixed(16), Default::default())
                .unwrap();
        for r in rows {
            let closed = 0.5 * e0 * (1.0 - (-4.0 * r.nu).exp());
            assert!((r.dissipation - closed).abs() < 1e-4 * closed);
            let gap = (1.0 - (-2.0 * r.nu).exp()) * e0.sqrt();
            assert!((r.sup_gap - gap).abs() < 1e-10);
        }
    }

    #[test]
    fn scalar_heat_closed_form() {
        let g = FourierGrid::new(16).unwrap();
        let src: Arc<dyn VelocitySource> = Arc::new(FrozenVelocity::new(init::shear(&g)));
        let rho0 = PhysicalScalar::from_fn(&g, |_, x2| x2.sin()).to_spectral();
        let e0 = scalar_norm(&rho0, NormKind::L2).unwrap().powi(2);
        let rows = scalar_dissipation_series(&rho0, src, &[0.01], 1.0, 0.01, Default::default()).unwrap();
        let closed = 0.5 * e0 * (1.0 - (-0.02f64).exp());
        assert!((rows[0].dissipation - closed).abs() < 1e-6 * closed);
        assert!(rows[0].resolved);
    }
}
