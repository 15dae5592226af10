use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::flow::{Direction, FlowMap};
use crate::dynamics::{ScalarPath, VelocitySource};
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{ModalField, PhysicalScalar, SpectralScalar};

/// `rho_t = rho_0 o X_t^{-1}`, sampled on the grid of `rho0`.
///
/// `backward` must be a backward flow seeded at the collocation points of
/// that grid, recorded at uniformly spaced times.
pub fn pushforward(rho0: &SpectralScalar, backward: &FlowMap) -> Result<ScalarPath> {
    if backward.direction() != Direction::Backward {
        return Err(Error::InvalidParameter("pushforward needs a backward flow".into()));
    }
    let grid = rho0.grid();
    if backward.grid_m() != Some(grid.n()) {
        return Err(Error::GridMismatch { left: grid.n(), right: backward.grid_m().unwrap_or(0) });
    }
    let times = backward.times();
    let dt = if times.len() > 1 { times[1] - times[0] } else { 1.0 };
    if times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0)) {
        return Err(Error::InvalidParameter("pushforward needs uniformly recorded flow times".into()));
    }
    let modal = ModalField::from_scalar(rho0);
    let states = backward
        .positions()
        .iter()
        .map(|pos| {
            let samples = par::map_slice(pos, |&x| modal.eval(x)[0]);
            PhysicalScalar::new(grid, samples).map(|p| p.to_spectral())
        })
        .collect::<Result<Vec<_>>>()?;
    ScalarPath::from_states(states, dt, None)
}

/// A renormalization `beta`: globally Lipschitz, bounded, with `beta(0) = 0`.
#[derive(Clone)]
pub struct Renormalizer {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    lipschitz: f64,
    name: String,
}

impl fmt::Debug for Renormalizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Renormalizer({}, lip={})", self.name, self.lipschitz)
    }
}

impl Renormalizer {
    pub fn new(name: &str, lipschitz: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let b0 = f(0.0);
        if b0 != 0.0 {
            return Err(Error::InvalidParameter(format!("renormalization must vanish at 0, got beta(0) = {b0}")));
        }
        if !(lipschitz >= 0.0 && lipschitz.is_finite()) {
            return Err(Error::InvalidParameter(format!("invalid Lipschitz constant {lipschitz}")));
        }
        Ok(Self { f: Arc::new(f), lipschitz, name: name.to_string() })
    }

    /// The identity clamped to `[-c, c]`.
    pub fn clamp(c: f64) -> Self {
        Self { f: Arc::new(move |r: f64| r.clamp(-c, c)), lipschitz: 1.0, name: format!("clamp({c})") }
    }

    pub fn zero() -> Self {
        Self { f: Arc::new(|_| 0.0), lipschitz: 0.0, name: "zero".into() }
    }

    pub fn apply(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// Test-function wavevectors; each is used with cos and sin, and with time
/// profiles `1` and `cos(pi t / T)`.
pub const TEST_WAVEVECTORS: [(i64, i64); 5] = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1)];

/// Composite Simpson weights on `n` uniform samples, closing with the 3/8
/// rule when the interval count is odd.
fn time_weights(n: usize, dt: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    if n == 1 {
        return w;
    }
    if n == 2 {
        w[0] = 0.5 * dt;
        w[1] = 0.5 * dt;
        return w;
    }
    let intervals = n - 1;
    let simpson_end = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
    for i in (0..simpson_end).step_by(2) {
        w[i] += dt / 3.0;
        w[i + 1] += 4.0 * dt / 3.0;
        w[i + 2] += dt / 3.0;
    }
    if simpson_end < intervals {
        let s = simpson_end;
        for (o, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[s + o] += 3.0 * dt / 8.0 * c;
        }
    }
    w
}

/// Largest weak-form defect of `beta(rho)` as a solution of the transport
/// equation driven by `velocity`:
///
/// `| int int beta(rho) (d_t phi + u . grad phi) dx dt + int beta(rho_0) phi_0 dx - int beta(rho_T) phi_T dx |`
///
/// over a fixed family of trigonometric test functions.
pub fn renormalize_check(rho: &ScalarPath, beta: &Renormalizer, velocity: &dyn VelocitySource) -> Result<f64> {
    let b0 = beta.apply(0.0);
    if b0 != 0.0 {
        return Err(Error::InvalidParameter(format!("renormalization must vanish at 0, got beta(0) = {b0}")));
    }
    let grid = rho.states()[0].grid().clone();
    let t_end = rho.final_time();
    if t_end > velocity.end_time() * (1.0 + 1e-12) {
        return Err(Error::PathMismatch("velocity does not cover the scalar path".into()));
    }
    let points = grid.points();
    let area = grid.cell_area();
    let n_tests = TEST_WAVEVECTORS.len() * 2;
    let wt = time_weights(rho.len(), rho.dt());

    // Per time: spatial integrals of beta(rho) g and beta(rho) u.grad g for each spatial test g.
    let per_time: Vec<(Vec<f64>, Vec<f64>)> = par::map_range(rho.len(), |ti| {
        let t = rho.times()[ti];
        let samples = rho.states()[ti].to_physical_unchecked();
        let b: Vec<f64> = samples.samples().iter().map(|&r| beta.apply(r)).collect();
        let mut u = velocity.velocity_at(t);
        if u.grid().n() != grid.n() {
            u = u.resample(&grid);
        }
        let [u1, u2] = u.to_physical_unchecked();
        let mut plain = vec![0.0; n_tests];
        let mut adv = vec![0.0; n_tests];
        for (idx, x) in points.iter().enumerate() {
            let bv = b[idx] * area;
            if bv == 0.0 {
                continue;
            }
            for (q, &(k1, k2)) in TEST_WAVEVECTORS.iter().enumerate() {
                let (k1, k2) = (k1 as f64, k2 as f64);
                let ph = k1 * x[0] + k2 * x[1];
                let (s, c) = ph.sin_cos();
                let kdotu = k1 * u1.samples()[idx] + k2 * u2.samples()[idx];
                plain[2 * q] += bv * c;
                adv[2 * q] += -bv * s * kdotu;
                plain[2 * q + 1] += bv * s;
                adv[2 * q + 1] += bv * c * kdotu;
            }
        }
        (plain, adv)
    });

    let profiles: [(Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>); 2] = [
        (Box::new(|_| 1.0), Box::new(|_| 0.0)),
        (
            Box::new(move |t: f64| (PI * t / t_end).cos()),
            Box::new(move |t: f64| -PI / t_end * (PI * t / t_end).sin()),
        ),
    ];
    let last = rho.len() - 1;
    let mut worst: f64 = 0.0;
    for (a, da) in &profiles {
        if t_end == 0.0 && rho.len() == 1 {
            break;
        }
        for q in 0..n_tests {
            let mut total = 0.0;
            for (ti, (plain, adv)) in per_time.iter().enumerate() {
                let t = rho.times()[ti];
                total += wt[ti] * (da(t) * plain[q] + a(t) * adv[q]);
            }
            total += a(0.0) * per_time[0].0[q] - a(t_end) * per_time[last].0[q];
            worst = worst.max(total.abs());
        }
    }
    Ok(worst)
}
