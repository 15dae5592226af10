use crate::dynamics::{nonlinear_term, SolutionPath};
use crate::error::{Error, Result};
use crate::spectral::{differentiate, galerkin_project, Axis, SpectralVector};

/// `E(v) = -d_t v - Pi[(v . grad) v]` at `path.times()[index]`.
///
/// `d_t v` is a second-order central difference in the interior and a
/// second-order one-sided difference at either end. For paths produced by a
/// Galerkin run the nonlinearity is projected with the same `Pi_n`, so the
/// residual measures the time discretization of the system actually solved.
/// Against any field in the range of `Pi_n` both versions pair identically.
pub fn euler_residual(path: &SolutionPath, index: usize) -> Result<SpectralVector> {
    let len = path.len();
    if len < 3 {
        return Err(Error::PathMismatch(format!("time derivative needs at least 3 states, got {len}")));
    }
    if index >= len {
        return Err(Error::InvalidParameter(format!("time index {index} out of range for {len} states")));
    }
    let s = path.states();
    let h = path.dt();
    let dt_v = if index == 0 {
        s[0].combine(-3.0, &s[1], 4.0)?.sub(&s[2])?.scaled(0.5 / h)
    } else if index == len - 1 {
        s[len - 1].combine(3.0, &s[len - 2], -4.0)?.add(&s[len - 3])?.scaled(0.5 / h)
    } else {
        s[index + 1].sub(&s[index - 1])?.scaled(0.5 / h)
    };
    let mut nl = nonlinear_term(&s[index]);
    if let Some(n) = path.spec().and_then(|sp| sp.galerkin_n()) {
        nl = galerkin_project(&nl, n)?;
    }
    dt_v.add(&nl).map(|r| r.scaled(-1.0))
}

/// `max_x |D(v)^-|` over the collocation grid, where `D(v) = sym grad v` and
/// the negative part of a symmetric 2x2 matrix is measured in spectral norm,
/// i.e. `max(0, -lambda_min)`.
pub fn strain_negative_part_sup(v: &SpectralVector) -> f64 {
    let [a, b] = v.components();
    let d11 = differentiate(a, Axis::X1).to_physical_unchecked();
    let d12 = differentiate(a, Axis::X2).to_physical_unchecked();
    let d21 = differentiate(b, Axis::X1).to_physical_unchecked();
    let d22 = differentiate(b, Axis::X2).to_physical_unchecked();
    let (d11, d12, d21, d22) = (d11.samples(), d12.samples(), d21.samples(), d22.samples());
    (0..d11.len())
        .map(|i| {
            let off = 0.5 * (d12[i] + d21[i]);
            let mid = 0.5 * (d11[i] + d22[i]);
            let rad = (0.5 * (d11[i] - d22[i])).hypot(off);
            (rad - mid).max(0.0)
        })
        .fold(0.0, f64::max)
}
