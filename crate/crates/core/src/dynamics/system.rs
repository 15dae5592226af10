use std::fmt;
use std::sync::Arc;

use super::source::VelocitySource;
use crate::error::{Error, Result};
use crate::spectral::{FourierGrid, SpectralScalar, SpectralVector};

/// Which semidiscrete system to integrate.
#[derive(Clone)]
pub enum SystemSpec {
    /// Euler equations truncated to Fourier modes with `|k| <= n`.
    EulerGalerkin { n: usize },
    /// Navier-Stokes with viscosity `nu`; `nu = 0` is dealiased Euler.
    NavierStokes { nu: f64 },
    /// Passive scalar advected by a prescribed velocity with diffusivity `kappa`.
    AdvectionDiffusion { kappa: f64, velocity: Arc<dyn VelocitySource> },
    /// Navier-Stokes velocity with a scalar advected by it.
    Coupled { nu: f64, kappa: f64 },
}

impl fmt::Debug for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EulerGalerkin { n } => write!(f, "EulerGalerkin {{ n: {n} }}"),
            Self::NavierStokes { nu } => write!(f, "NavierStokes {{ nu: {nu} }}"),
            Self::AdvectionDiffusion { kappa, velocity } => {
                write!(f, "AdvectionDiffusion {{ kappa: {kappa}, velocity: {velocity:?} }}")
            }
            Self::Coupled { nu, kappa } => write!(f, "Coupled {{ nu: {nu}, kappa: {kappa} }}"),
        }
    }
}

impl SystemSpec {
    pub fn viscosity(&self) -> f64 {
        match self {
            Self::NavierStokes { nu } | Self::Coupled { nu, .. } => *nu,
            _ => 0.0,
        }
    }

    pub fn diffusivity(&self) -> f64 {
        match self {
            Self::AdvectionDiffusion { kappa, .. } | Self::Coupled { kappa, .. } => *kappa,
            _ => 0.0,
        }
    }

    pub fn galerkin_n(&self) -> Option<usize> {
        match self {
            Self::EulerGalerkin { n } => Some(*n),
            _ => None,
        }
    }

    pub fn has_velocity(&self) -> bool {
        !matches!(self, Self::AdvectionDiffusion { .. })
    }

    pub fn has_scalar(&self) -> bool {
        matches!(self, Self::AdvectionDiffusion { .. } | Self::Coupled { .. })
    }

    pub fn validate(&self, grid: &FourierGrid) -> Result<()> {
        let (nu, kappa) = (self.viscosity(), self.diffusivity());
        if !(nu >= 0.0 && nu.is_finite()) || !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!("nu = {nu}, kappa = {kappa} must be finite and >= 0")));
        }
        if let Self::EulerGalerkin { n } = self {
            if *n < 1 || *n > grid.dealias_cutoff() {
                return Err(Error::InvalidParameter(format!(
                    "Galerkin n = {n} must lie in [1, {}]",
                    grid.dealias_cutoff()
                )));
            }
        }
        if let Self::AdvectionDiffusion { velocity, .. } = self {
            if **velocity.grid() != *grid {
                return Err(Error::GridMismatch { left: velocity.grid().n(), right: grid.n() });
            }
        }
        Ok(())
    }
}

/// State of any supported system at one instant.
#[derive(Clone, Debug)]
pub enum FlowState {
    Velocity(SpectralVector),
    Scalar(SpectralScalar),
    Coupled { velocity: SpectralVector, scalar: SpectralScalar },
}

impl FlowState {
    pub fn grid(&self) -> &Arc<FourierGrid> {
        match self {
            Self::Velocity(u) | Self::Coupled { velocity: u, .. } => u.grid(),
            Self::Scalar(s) => s.grid(),
        }
    }

    pub fn velocity(&self) -> Option<&SpectralVector> {
        match self {
            Self::Velocity(u) | Self::Coupled { velocity: u, .. } => Some(u),
            Self::Scalar(_) => None,
        }
    }

    pub fn scalar(&self) -> Option<&SpectralScalar> {
        match self {
            Self::Scalar(s) | Self::Coupled { scalar: s, .. } => Some(s),
            Self::Velocity(_) => None,
        }
    }

    pub(crate) fn into_fields(self) -> Vec<SpectralScalar> {
        match self {
            Self::Velocity(u) => u.into_components().into(),
            Self::Scalar(s) => vec![s],
            Self::Coupled { velocity, scalar } => {
                let [a, b] = velocity.into_components();
                vec![a, b, scalar]
            }
        }
    }

    pub(crate) fn from_fields(like: &FlowState, mut fields: Vec<SpectralScalar>) -> Self {
        match like {
            Self::Velocity(_) => {
                let b = fields.pop().unwrap();
                let a = fields.pop().unwrap();
                Self::Velocity(SpectralVector::from_components_solenoidal(a, b))
            }
            Self::Scalar(_) => Self::Scalar(fields.pop().unwrap()),
            Self::Coupled { .. } => {
                let s = fields.pop().unwrap();
                let b = fields.pop().unwrap();
                let a = fields.pop().unwrap();
                Self::Coupled { velocity: SpectralVector::from_components_solenoidal(a, b), scalar: s }
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.velocity().is_none_or(SpectralVector::is_finite) && self.scalar().is_none_or(SpectralScalar::is_finite)
    }
}
