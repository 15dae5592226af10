#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Pseudo-spectral laboratory for 2D incompressible Euler and Navier-Stokes
//! on the torus: Galerkin and viscous solvers, passive-scalar transport,
//! Lagrangian flow maps, and the stability functionals used to certify them.

pub mod error;
pub mod par;
pub mod analysis;
pub mod dynamics;
pub mod harness;
pub mod lagrangian;
pub mod spectral;

pub use error::{Error, Result};
