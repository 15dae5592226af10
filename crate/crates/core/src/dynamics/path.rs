use super::system::SystemSpec;
use crate::error::{Error, Result};
use crate::spectral::{SpectralScalar, SpectralVector};

/// Relative tolerance on uniform time spacing.
const SPACING_TOL: f64 = 1e-12;

/// Uniformly spaced sequence of stored states, starting at `t = 0`.
#[derive(Clone, Debug)]
pub struct Path<S> {
    times: Vec<f64>,
    states: Vec<S>,
    spec: Option<SystemSpec>,
    dt: f64,
    step_dt: f64,
}

/// Velocity path `t -> u_t`.
pub type SolutionPath = Path<SpectralVector>;
/// Scalar path `t -> rho_t`.
pub type ScalarPath = Path<SpectralScalar>;

impl<S> Path<S> {
    /// Builds a path from states spaced `dt` apart, starting at zero.
    pub fn from_states(states: Vec<S>, dt: f64, spec: Option<SystemSpec>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::PathMismatch("a path needs at least one state".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("time step {dt} must be positive")));
        }
        let times = (0..states.len()).map(|i| i as f64 * dt).collect();
        Ok(Self { times, states, spec, dt, step_dt: dt })
    }

    pub(crate) fn with_step_dt(mut self, step_dt: f64) -> Self {
        self.step_dt = step_dt;
        self
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn spec(&self) -> Option<&SystemSpec> {
        self.spec.as_ref()
    }

    /// Spacing between stored states.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Integrator time step that produced the path.
    pub fn step_dt(&self) -> f64 {
        self.step_dt
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn last(&self) -> &S {
        self.states.last().unwrap()
    }

    /// Index `i` and weight `theta` with `t = (1-theta) t_i + theta t_{i+1}`.
    /// Times outside the span are clamped.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let last = self.states.len() - 1;
        if last == 0 || t <= 0.0 {
            return (0, 0.0);
        }
        let s = t / self.dt;
        if s >= last as f64 {
            return (last, 0.0);
        }
        let i = s.floor() as usize;
        let theta = s - i as f64;
        if theta < 1e-12 {
            (i, 0.0)
        } else if theta > 1.0 - 1e-12 {
            (i + 1, 0.0)
        } else {
            (i, theta)
        }
    }

    /// Checks two paths share length and time grid.
    pub fn check_compatible<T>(&self, other: &Path<T>) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::PathMismatch(format!("lengths {} and {}", self.len(), other.len())));
        }
        if (self.dt - other.dt).abs() > SPACING_TOL * self.dt {
            return Err(Error::PathMismatch(format!("time steps {} and {}", self.dt, other.dt)));
        }
        Ok(())
    }
}

/// Composite trapezoid rule on a uniform grid.
pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => dt * (0.5 * (values[0] + values[n - 1]) + values[1..n - 1].iter().sum::<f64>()),
    }
}

/// Running trapezoid integral, `out[i] = int_0^{t_i}`.
pub fn cumulative_trapezoid(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            acc += 0.5 * dt * (values[i - 1] + v);
        }
        out.push(acc);
    }
    out
}
