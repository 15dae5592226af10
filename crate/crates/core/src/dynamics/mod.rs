//! Time integration of the Galerkin-truncated Euler system, Navier-Stokes,
//! passive-scalar transport and the coupled system, with energy diagnostics.

mod diagnostics;
mod integrator;
mod path;
mod source;
mod system;

pub use diagnostics::{diagnostics, scalar_diagnostics, DiagnosticAccumulator, DiagnosticSeries, DIAGNOSTIC_HEADER};
pub use integrator::{
    advection_term, evolve, nonlinear_term, run, run_scalar, run_velocity, run_with, step, step_count, Integrator,
    RunOptions, RunOutput, CFL_LIMIT,
};
pub use path::{cumulative_trapezoid, trapezoid, Path, ScalarPath, SolutionPath};
pub use source::{FrozenVelocity, Reversed, VelocitySource};
pub use system::{FlowState, SystemSpec};
