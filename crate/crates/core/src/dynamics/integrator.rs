//! Classical RK4 with an exact integrating factor for the diffusion term.

use std::sync::Arc;

use num_complex::Complex64;

use super::path::{ScalarPath, SolutionPath};
use super::system::{FlowState, SystemSpec};
use crate::error::{Error, Result};
use crate::spectral::ops::{dealias_in_place, dealiased_product, galerkin_project_scalar_in_place};
use crate::spectral::{
    curl2d, differentiate, galerkin_project, leray_project, vector_norm, Axis, FourierGrid, PhysicalScalar,
    SpectralScalar, SpectralVector, NormKind,
};

/// CFL-style threshold: `dt * max|u| <= CFL_LIMIT * (2 pi / N)`.
pub const CFL_LIMIT: f64 = 0.5;
const CFL_CHECK_EVERY: usize = 50;

/// Projected nonlinearity `Pi[(u . grad) u]`, dealiased at the grid cutoff.
///
/// Evaluated in rotational form `Pi[omega u_perp]` with `u_perp = (-u2, u1)`:
/// the gradient part `grad |u|^2/2` of the convective term is annihilated by
/// the projection, and with the 2/3 cutoff both forms agree on retained modes.
pub fn nonlinear_term(u: &SpectralVector) -> SpectralVector {
    let g = u.grid().clone();
    let [p1, p2] = u.to_physical_unchecked();
    let w = curl2d(u).to_physical_unchecked();
    let f1 = dealiased_product(w.samples(), p2.samples(), &g).scaled(-1.0);
    let f2 = dealiased_product(w.samples(), p1.samples(), &g);
    leray_project(&SpectralVector::from_components(f1, f2))
}

/// Dealiased advection term `u . grad rho`, with its mean removed.
pub fn advection_term(u_samples: &[PhysicalScalar; 2], rho: &SpectralScalar) -> SpectralScalar {
    let g = rho.grid().clone();
    let d1 = differentiate(rho, Axis::X1).to_physical_unchecked();
    let d2 = differentiate(rho, Axis::X2).to_physical_unchecked();
    let samples: Vec<f64> = (0..g.len())
        .map(|i| u_samples[0].samples()[i] * d1.samples()[i] + u_samples[1].samples()[i] * d2.samples()[i])
        .collect();
    let mut out = PhysicalScalar::new(&g, samples).expect("sample count").to_spectral();
    dealias_in_place(&mut out);
    out.coeffs_mut()[0] = Complex64::default();
    out
}

/// Steps one of the supported systems forward in time.
pub struct Integrator {
    spec: SystemSpec,
    grid: Arc<FourierGrid>,
    dt: f64,
    t: f64,
    steps: usize,
    state: FlowState,
    /// Per-field diffusion factors `exp(-d |k|^2 dt/2)` and `exp(-d |k|^2 dt)`.
    half: Vec<Arc<Vec<f64>>>,
    full: Vec<Arc<Vec<f64>>>,
    cfl_warned: bool,
}

fn decay_factors(grid: &FourierGrid, d: f64, h: f64) -> Arc<Vec<f64>> {
    Arc::new((0..grid.len()).map(|i| (-d * grid.k_squared(i) * h).exp()).collect())
}

impl Integrator {
    pub fn new(spec: SystemSpec, initial: FlowState, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt = {dt} must be positive")));
        }
        let grid = initial.grid().clone();
        spec.validate(&grid)?;
        check_initial(&spec, &initial)?;
        let (nu, kappa) = (spec.viscosity(), spec.diffusivity());
        let (hv, fv) = (decay_factors(&grid, nu, 0.5 * dt), decay_factors(&grid, nu, dt));
        let (hs, fs) = (decay_factors(&grid, kappa, 0.5 * dt), decay_factors(&grid, kappa, dt));
        let (half, full) = match &initial {
            FlowState::Velocity(_) => (vec![hv.clone(), hv], vec![fv.clone(), fv]),
            FlowState::Scalar(_) => (vec![hs], vec![fs]),
            FlowState::Coupled { .. } => (vec![hv.clone(), hv, hs], vec![fv.clone(), fv, fs]),
        };
        Ok(Self { spec, grid, dt, t: 0.0, steps: 0, state: initial, half, full, cfl_warned: false })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn state(&self) -> &FlowState {
        &self.state
    }

    pub fn into_state(self) -> FlowState {
        self.state
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    fn advecting_velocity(&self, t: f64, fields: &[SpectralScalar]) -> SpectralVector {
        match &self.spec {
            SystemSpec::AdvectionDiffusion { velocity, .. } => velocity.velocity_at(t),
            _ => SpectralVector::from_components_solenoidal(fields[0].clone(), fields[1].clone()),
        }
    }

    fn rhs(&self, t: f64, fields: &[SpectralScalar]) -> Vec<SpectralScalar> {
        let mut out = Vec::with_capacity(fields.len());
        if self.spec.has_velocity() {
            let u = SpectralVector::from_components_solenoidal(fields[0].clone(), fields[1].clone());
            let mut nl = nonlinear_term(&u);
            if let Some(n) = self.spec.galerkin_n() {
                nl = galerkin_project(&nl, n).expect("n validated");
            }
            let [a, b] = nl.scaled(-1.0).into_components();
            out.push(a);
            out.push(b);
        }
        if self.spec.has_scalar() {
            let rho = fields.last().unwrap();
            let u = self.advecting_velocity(t, fields);
            let samples = u.to_physical_unchecked();
            out.push(advection_term(&samples, rho).scaled(-1.0));
        }
        out
    }

    /// Applies the state constraints after every stage.
    fn constrain(&self, fields: &mut [SpectralScalar]) {
        if let Some(n) = self.spec.galerkin_n() {
            for f in fields.iter_mut().take(2) {
                galerkin_project_scalar_in_place(f, n);
            }
        }
    }

    fn check_cfl(&mut self) {
        if self.cfl_warned || !self.steps.is_multiple_of(CFL_CHECK_EVERY) {
            return;
        }
        let u = match (&self.spec, self.state.velocity()) {
            (SystemSpec::AdvectionDiffusion { velocity, .. }, _) => velocity.velocity_at(self.t),
            (_, Some(u)) => u.clone(),
            _ => return,
        };
        let umax = vector_norm(&u, NormKind::Sup).unwrap_or(0.0);
        let limit = CFL_LIMIT * self.grid.spacing();
        if self.dt * umax > limit {
            log::warn!(
                "CFL: dt * max|u| = {:.3e} exceeds {:.3e} at t = {:.4}",
                self.dt * umax,
                limit,
                self.t
            );
            self.cfl_warned = true;
        }
    }

    /// Advances one step of size `dt`.
    pub fn step(&mut self) -> Result<()> {
        self.check_cfl();
        let next = self.advance(&self.state, self.t)?;
        self.state = next;
        self.steps += 1;
        self.t = self.steps as f64 * self.dt;
        Ok(())
    }

    fn advance(&self, state: &FlowState, t: f64) -> Result<FlowState> {
        let h = self.dt;
        let u0 = state.clone().into_fields();
        let m = u0.len();

        // a = E_half x + c * k, elementwise on coefficients
        let combine = |base: &[SpectralScalar], base_half: bool, incs: &[(&[SpectralScalar], f64, bool)]| {
            let mut out = Vec::with_capacity(m);
            for f in 0..m {
                let (eh, ef) = (&self.half[f], &self.full[f]);
                let coeffs: Vec<Complex64> = (0..self.grid.len())
                    .map(|i| {
                        let mut v = base[f].coeffs()[i] * if base_half { eh[i] } else { ef[i] };
                        for (inc, c, half_decay) in incs {
                            let d = if *half_decay { eh[i] } else { 1.0 };
                            v += inc[f].coeffs()[i] * (c * d);
                        }
                        v
                    })
                    .collect();
                out.push(SpectralScalar::from_coeffs_unchecked(&self.grid, coeffs));
            }
            out
        };

        let k1 = self.rhs(t, &u0);
        // stage 2: E_half (u + h/2 k1)
        let mut s2 = combine(&u0, true, &[(&k1, 0.5 * h, true)]);
        self.constrain(&mut s2);
        let k2 = self.rhs(t + 0.5 * h, &s2);
        let mut s3 = combine(&u0, true, &[(&k2, 0.5 * h, false)]);
        self.constrain(&mut s3);
        let k3 = self.rhs(t + 0.5 * h, &s3);
        let mut s4 = combine(&u0, false, &[(&k3, h, true)]);
        self.constrain(&mut s4);
        let k4 = self.rhs(t + h, &s4);

        // E u + h/6 (E k1 + 2 E_half (k2 + k3) + k4)
        let mut out = Vec::with_capacity(m);
        for f in 0..m {
            let (eh, ef) = (&self.half[f], &self.full[f]);
            let coeffs: Vec<Complex64> = (0..self.grid.len())
                .map(|i| {
                    ef[i] * (u0[f].coeffs()[i] + k1[f].coeffs()[i] * (h / 6.0))
                        + (k2[f].coeffs()[i] + k3[f].coeffs()[i]) * (eh[i] * h / 3.0)
                        + k4[f].coeffs()[i] * (h / 6.0)
                })
                .collect();
            out.push(SpectralScalar::from_coeffs_unchecked(&self.grid, coeffs));
        }
        self.constrain(&mut out);
        let next = FlowState::from_fields(state, out);
        if !next.is_finite() {
            return Err(Error::BlowUp { last_valid_time: t });
        }
        Ok(next)
    }
}

fn check_initial(spec: &SystemSpec, initial: &FlowState) -> Result<()> {
    match (spec.has_velocity(), spec.has_scalar(), initial) {
        (true, false, FlowState::Velocity(_)) | (false, true, FlowState::Scalar(_)) | (true, true, FlowState::Coupled { .. }) => {}
        _ => return Err(Error::InvalidInitialData(format!("state kind does not match {spec:?}"))),
    }
    if let Some(u) = initial.velocity() {
        let scale = u.components().iter().flat_map(|c| c.coeffs()).map(|c| c.norm()).fold(0.0, f64::max);
        for c in u.components() {
            c.check_hermitian()?;
            if c.mean().abs() > 1e-12 * scale.max(1.0) {
                return Err(Error::InvalidInitialData("velocity must have zero mean".into()));
            }
            if !crate::spectral::ops::is_dealiased(c) {
                return Err(Error::InvalidInitialData("velocity must be dealiased".into()));
            }
        }
        if !u.is_divergence_free() {
            return Err(Error::InvalidInitialData("velocity must be divergence-free".into()));
        }
        if let Some(n) = spec.galerkin_n() {
            let g = u.grid().clone();
            let limit = (n * n) as f64;
            if !u.components().iter().all(|c| c.is_supported_on(|i| g.k_squared(i) <= limit)) {
                return Err(Error::InvalidInitialData(format!("initial datum is not in the range of Pi_{n}")));
            }
        }
    }
    if let Some(s) = initial.scalar() {
        s.check_hermitian()?;
        if !crate::spectral::ops::is_dealiased(s) {
            return Err(Error::InvalidInitialData("scalar must be dealiased".into()));
        }
    }
    Ok(())
}

/// One step of the semidiscrete system from time `t`.
pub fn step(spec: &SystemSpec, state: &FlowState, t: f64, dt: f64) -> Result<FlowState> {
    let mut it = Integrator::new(spec.clone(), state.clone(), dt)?;
    it.t = t;
    it.advance(state, t)
}

/// Number of steps `m` with `t_end = m dt`.
pub fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!("need t_end >= 0 and dt > 0, got {t_end}, {dt}")));
    }
    let m = (t_end / dt).round();
    if (m * dt - t_end).abs() > 1e-9 * t_end.max(dt) {
        return Err(Error::InvalidParameter(format!("t_end = {t_end} is not a multiple of dt = {dt}")));
    }
    Ok(m as usize)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// Store every `save_every`-th step (and always the first and last).
    pub save_every: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { save_every: 1 }
    }
}

/// Paths produced by a run; which ones are present depends on the system.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub velocity: Option<SolutionPath>,
    pub scalar: Option<ScalarPath>,
}

/// Integrates `initial` to `t_end` and stores every step.
pub fn run(spec: &SystemSpec, initial: FlowState, t_end: f64, dt: f64) -> Result<RunOutput> {
    run_with(spec, initial, t_end, dt, RunOptions::default())
}

pub fn run_with(spec: &SystemSpec, initial: FlowState, t_end: f64, dt: f64, opts: RunOptions) -> Result<RunOutput> {
    let every = opts.save_every.max(1);
    let m = step_count(t_end, dt)?;
    if m % every != 0 {
        return Err(Error::InvalidParameter(format!("save_every = {every} must divide the step count {m}")));
    }
    let mut vel = Vec::new();
    let mut sca = Vec::new();
    evolve(spec, initial, t_end, dt, |step, _, state| {
        if step % every == 0 {
            if let Some(u) = state.velocity() {
                vel.push(u.clone());
            }
            if let Some(s) = state.scalar() {
                sca.push(s.clone());
            }
        }
    })?;
    let spacing = dt * every as f64;
    let velocity = if vel.is_empty() {
        None
    } else {
        Some(SolutionPath::from_states(vel, spacing, Some(spec.clone()))?.with_step_dt(dt))
    };
    let scalar = if sca.is_empty() {
        None
    } else {
        Some(ScalarPath::from_states(sca, spacing, Some(spec.clone()))?.with_step_dt(dt))
    };
    Ok(RunOutput { velocity, scalar })
}

/// Integrates to `t_end`, calling `observe(step, t, state)` for the initial
/// state and after every step. Returns the final state.
pub fn evolve<F>(spec: &SystemSpec, initial: FlowState, t_end: f64, dt: f64, mut observe: F) -> Result<FlowState>
where
    F: FnMut(usize, f64, &FlowState),
{
    let m = step_count(t_end, dt)?;
    let mut it = Integrator::new(spec.clone(), initial, dt)?;
    observe(0, 0.0, it.state());
    for _ in 0..m {
        it.step()?;
        observe(it.steps(), it.time(), it.state());
    }
    Ok(it.into_state())
}

pub fn run_velocity(spec: &SystemSpec, u0: &SpectralVector, t_end: f64, dt: f64, opts: RunOptions) -> Result<SolutionPath> {
    run_with(spec, FlowState::Velocity(u0.clone()), t_end, dt, opts)?
        .velocity
        .ok_or_else(|| Error::InvalidParameter(format!("{spec:?} has no velocity")))
}

pub fn run_scalar(spec: &SystemSpec, rho0: &SpectralScalar, t_end: f64, dt: f64, opts: RunOptions) -> Result<ScalarPath> {
    run_with(spec, FlowState::Scalar(rho0.clone()), t_end, dt, opts)?
        .scalar
        .ok_or_else(|| Error::InvalidParameter(format!("{spec:?} has no scalar")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::source::FrozenVelocity;
    use crate::spectral::{init, vector_norm, NormKind};

    fn max_coeff(u: &SpectralVector) -> f64 {
        u.components().iter().flat_map(|c| c.coeffs()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn nonlinear_term_vanishes_on_steady_fields() {
        let g = FourierGrid::new(32).unwrap();
        assert_eq!(max_coeff(&nonlinear_term(&SpectralVector::zeros(&g))), 0.0);
        assert!(max_coeff(&nonlinear_term(&init::taylor_green(&g))) < 1e-12);
        assert!(max_coeff(&nonlinear_term(&init::shear(&g))) < 1e-12);
    }

    #[test]
    fn nonlinear_term_matches_convective_form() {
        let g = FourierGrid::new(32).unwrap();
        let u = init::random_velocity(&g, init::RandomSpectrum { band: 6, ..Default::default() }, 11).unwrap();
        let a = nonlinear_term(&u);
        let b = leray_project(&crate::spectral::convective_term(&u));
        assert!(max_coeff(&a.sub(&b).unwrap()) < 1e-13);
        assert!(a.is_divergence_free());
        assert_eq!(a.mean(), [0.0, 0.0]);
    }

    #[test]
    fn ns_step_on_eigenfunction() {
        let g = FourierGrid::new(16).unwrap();
        let tg = init::taylor_green(&g);
        let (nu, dt) = (0.3, 0.05);
        let next = step(&SystemSpec::NavierStokes { nu }, &FlowState::Velocity(tg.clone()), 0.0, dt).unwrap();
        let expect = tg.scaled((-2.0 * nu * dt).exp());
        let err = max_coeff(&next.velocity().unwrap().sub(&expect).unwrap());
        assert!(err <= 1e-14, "{err}");
    }

    #[test]
    fn galerkin_step_keeps_taylor_green() {
        let g = FourierGrid::new(16).unwrap();
        let tg = init::taylor_green(&g);
        let next = step(&SystemSpec::EulerGalerkin { n: 3 }, &FlowState::Velocity(tg.clone()), 0.0, 0.01).unwrap();
        assert!(max_coeff(&next.velocity().unwrap().sub(&tg).unwrap()) < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = FourierGrid::new(16).unwrap();
        let tg = init::taylor_green(&g);
        assert!(Integrator::new(SystemSpec::EulerGalerkin { n: 6 }, FlowState::Velocity(tg.clone()), 0.1).is_err());
        assert!(Integrator::new(SystemSpec::EulerGalerkin { n: 1 }, FlowState::Velocity(tg.clone()), 0.1).is_err());
        assert!(Integrator::new(SystemSpec::NavierStokes { nu: -1.0 }, FlowState::Velocity(tg.clone()), 0.1).is_err());
        assert!(Integrator::new(SystemSpec::NavierStokes { nu: 0.1 }, FlowState::Velocity(tg.clone()), 0.0).is_err());
        assert!(step_count(1.0, 0.3).is_err());
        assert_eq!(step_count(1.0, 1e-3).unwrap(), 1000);
    }

    #[test]
    fn blow_up_is_reported() {
        let g = FourierGrid::new(16).unwrap();
        let u = init::random_velocity(&g, init::RandomSpectrum { band: 4, l2_norm: 1e3, slope: 0.0 }, 1).unwrap();
        let err = run_velocity(&SystemSpec::NavierStokes { nu: 0.0 }, &u, 50.0, 0.5, RunOptions::default()).unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. }), "{err:?}");
    }

    #[test]
    fn shear_advection_is_heat_equation() {
        let g = FourierGrid::new(16).unwrap();
        let src = Arc::new(FrozenVelocity::new(init::shear(&g)));
        let rho0 = PhysicalScalar::from_fn(&g, |_, x2| x2.sin()).to_spectral();
        let kappa = 0.2;
        let spec = SystemSpec::AdvectionDiffusion { kappa, velocity: src };
        let path = run_scalar(&spec, &rho0, 1.0, 0.01, RunOptions { save_every: 10 }).unwrap();
        assert_eq!(path.len(), 11);
        for (t, s) in path.times().iter().zip(path.states()) {
            let expect = rho0.scaled((-kappa * t).exp());
            let err = s.sub(&expect).unwrap().coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-14);
        }
    }

    #[test]
    fn run_decays_taylor_green() {
        let g = FourierGrid::new(16).unwrap();
        let tg = init::taylor_green(&g);
        let path = run_velocity(&SystemSpec::NavierStokes { nu: 0.1 }, &tg, 1.0, 0.01, RunOptions::default()).unwrap();
        assert_eq!(path.len(), 101);
        let ratio = vector_norm(path.last(), NormKind::L2).unwrap() / vector_norm(&tg, NormKind::L2).unwrap();
        assert!((ratio - (-0.2f64).exp()).abs() < 1e-12);
    }
}
