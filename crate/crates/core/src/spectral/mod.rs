//! Fourier representation of periodic fields on the torus `[0, 2pi)^2`.

mod eval;
mod field;
mod grid;
pub mod init;
mod norm;
pub mod ops;
pub mod snapshot;

pub use eval::{eval_velocity, ModalField};
pub use field::{PhysicalScalar, SpectralScalar, SpectralVector, DIVERGENCE_TOL, NOISE_FLOOR};
pub use grid::FourierGrid;
pub use norm::{
    gradient_energy, scalar_gradient_energy, scalar_norm, scalar_norm_with, vector_norm, vector_norm_with, NormKind,
    NormOptions,
};
pub use ops::{
    biot_savart, convective_term, curl2d, dealias, dealias_vector, differentiate, divergence, galerkin_project,
    gradient, leray_project, perp_gradient, pressure_recover, stream_function, Axis,
};
