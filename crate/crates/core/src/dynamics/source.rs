use std::fmt;
use std::sync::Arc;

use super::path::SolutionPath;
use crate::spectral::{FourierGrid, ModalField, SpectralVector};

/// A time-dependent velocity field that can be sampled at any time in its span.
pub trait VelocitySource: Send + Sync + fmt::Debug {
    fn grid(&self) -> &Arc<FourierGrid>;

    fn velocity_at(&self, t: f64) -> SpectralVector;

    /// Sparse modal form for off-grid evaluation at time `t`.
    fn modal_at(&self, t: f64) -> ModalField {
        ModalField::from_vector(&self.velocity_at(t))
    }

    /// True when the field does not depend on time.
    fn is_autonomous(&self) -> bool;

    /// Largest time at which the field is defined.
    fn end_time(&self) -> f64;
}

/// A time-independent velocity field.
#[derive(Clone)]
pub struct FrozenVelocity {
    u: SpectralVector,
    modal: ModalField,
}

impl fmt::Debug for FrozenVelocity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FrozenVelocity(N={}, modes={})", self.u.grid().n(), self.modal.mode_count())
    }
}

impl FrozenVelocity {
    pub fn new(u: SpectralVector) -> Self {
        let modal = ModalField::from_vector(&u);
        Self { u, modal }
    }

    pub fn field(&self) -> &SpectralVector {
        &self.u
    }
}

impl VelocitySource for FrozenVelocity {
    fn grid(&self) -> &Arc<FourierGrid> {
        self.u.grid()
    }

    fn velocity_at(&self, _t: f64) -> SpectralVector {
        self.u.clone()
    }

    fn modal_at(&self, _t: f64) -> ModalField {
        self.modal.clone()
    }

    fn is_autonomous(&self) -> bool {
        true
    }

    fn end_time(&self) -> f64 {
        f64::INFINITY
    }
}

/// Linear interpolation in time between the stored states of a path.
impl VelocitySource for SolutionPath {
    fn grid(&self) -> &Arc<FourierGrid> {
        self.states()[0].grid()
    }

    fn velocity_at(&self, t: f64) -> SpectralVector {
        let (i, theta) = self.locate(t);
        if theta == 0.0 {
            self.states()[i].clone()
        } else {
            self.states()[i].combine(1.0 - theta, &self.states()[i + 1], theta).expect("shared grid")
        }
    }

    fn modal_at(&self, t: f64) -> ModalField {
        let (i, theta) = self.locate(t);
        if theta == 0.0 {
            ModalField::from_vector(&self.states()[i])
        } else {
            ModalField::lerp_vectors(&self.states()[i], &self.states()[i + 1], theta)
        }
    }

    fn is_autonomous(&self) -> bool {
        self.states().len() == 1
    }

    fn end_time(&self) -> f64 {
        *self.times().last().unwrap()
    }
}

/// Velocity `s -> -inner(t0 - s)`, used to integrate flows backward from `t0`.
#[derive(Debug)]
pub struct Reversed<'a> {
    inner: &'a dyn VelocitySource,
    t0: f64,
}

impl<'a> Reversed<'a> {
    pub fn new(inner: &'a dyn VelocitySource, t0: f64) -> Self {
        Self { inner, t0 }
    }
}

impl VelocitySource for Reversed<'_> {
    fn grid(&self) -> &Arc<FourierGrid> {
        self.inner.grid()
    }

    fn velocity_at(&self, s: f64) -> SpectralVector {
        self.inner.velocity_at(self.t0 - s).scaled(-1.0)
    }

    fn modal_at(&self, s: f64) -> ModalField {
        ModalField::from_vector(&self.velocity_at(s))
    }

    fn is_autonomous(&self) -> bool {
        self.inner.is_autonomous()
    }

    fn end_time(&self) -> f64 {
        self.t0
    }
}
