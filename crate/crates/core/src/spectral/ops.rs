//! Spectral calculus: derivatives, Biot-Savart inversion, projections, pressure.

use num_complex::Complex64;

use super::field::{check_same_grid, PhysicalScalar, SpectralScalar, SpectralVector};
use crate::error::{Error, Result};

/// Tolerance on `|c_0|` for inputs that must be zero-mean.
pub const ZERO_MEAN_TOL: f64 = 1e-12;

/// Coordinate axis, `X1` is the first (row) index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

/// Multiplies coefficients by `i k_axis`.
pub fn differentiate(f: &SpectralScalar, axis: Axis) -> SpectralScalar {
    let g = f.grid().clone();
    let n = g.n();
    let coeffs = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(idx, &c)| {
            let k = match axis {
                Axis::X1 => g.deriv_wavenumber(idx / n),
                Axis::X2 => g.deriv_wavenumber(idx % n),
            };
            c * Complex64::new(0.0, k)
        })
        .collect();
    SpectralScalar::from_coeffs_unchecked(&g, coeffs)
}

pub fn gradient(f: &SpectralScalar) -> SpectralVector {
    SpectralVector::from_components(differentiate(f, Axis::X1), differentiate(f, Axis::X2))
}

/// `(-d2 f, d1 f)`.
pub fn perp_gradient(f: &SpectralScalar) -> SpectralVector {
    SpectralVector::from_components(differentiate(f, Axis::X2).scaled(-1.0), differentiate(f, Axis::X1))
}

pub fn divergence(u: &SpectralVector) -> SpectralScalar {
    let d1 = differentiate(u.component(0), Axis::X1);
    let d2 = differentiate(u.component(1), Axis::X2);
    d1.add(&d2).expect("components share a grid")
}

/// Scalar vorticity `d1 u2 - d2 u1`.
pub fn curl2d(u: &SpectralVector) -> SpectralScalar {
    let a = differentiate(u.component(1), Axis::X1);
    let b = differentiate(u.component(0), Axis::X2);
    a.sub(&b).expect("components share a grid")
}

/// Velocity with vorticity `omega`: `u = perp_grad(psi)` with `lap psi = omega`.
pub fn biot_savart(omega: &SpectralScalar) -> Result<SpectralVector> {
    omega.check_zero_mean(ZERO_MEAN_TOL)?;
    let g = omega.grid().clone();
    let n = g.n();
    let mut u1 = vec![Complex64::default(); g.len()];
    let mut u2 = vec![Complex64::default(); g.len()];
    for (idx, &w) in omega.coeffs().iter().enumerate() {
        let k2sum = g.k_squared(idx);
        if k2sum == 0.0 {
            continue;
        }
        let (a, b) = (g.deriv_wavenumber(idx / n), g.deriv_wavenumber(idx % n));
        // psi = -w/|k|^2, u = (-i k2 psi, i k1 psi)
        let psi = -w / k2sum;
        u1[idx] = Complex64::new(0.0, -b) * psi;
        u2[idx] = Complex64::new(0.0, a) * psi;
    }
    Ok(SpectralVector::from_components_solenoidal(
        SpectralScalar::from_coeffs_unchecked(&g, u1),
        SpectralScalar::from_coeffs_unchecked(&g, u2),
    ))
}

/// Stream function `psi` with `lap psi = omega` and zero mean.
pub fn stream_function(omega: &SpectralScalar) -> Result<SpectralScalar> {
    omega.check_zero_mean(ZERO_MEAN_TOL)?;
    let g = omega.grid().clone();
    let coeffs = omega
        .coeffs()
        .iter()
        .enumerate()
        .map(|(idx, &w)| {
            let k2 = g.k_squared(idx);
            if k2 == 0.0 {
                Complex64::default()
            } else {
                -w / k2
            }
        })
        .collect();
    Ok(SpectralScalar::from_coeffs_unchecked(&g, coeffs))
}

/// Leray projection `u(k) -> (I - k k^T/|k|^2) u(k)`; also removes the mean.
pub fn leray_project(v: &SpectralVector) -> SpectralVector {
    let g = v.grid().clone();
    let (a, b) = (v.component(0).coeffs(), v.component(1).coeffs());
    let mut u1 = vec![Complex64::default(); g.len()];
    let mut u2 = vec![Complex64::default(); g.len()];
    for idx in 0..g.len() {
        let k2sum = g.k_squared(idx);
        if k2sum == 0.0 {
            continue;
        }
        let (k1, k2) = g.wavevector(idx);
        let (k1, k2) = (k1 as f64, k2 as f64);
        let dot = (a[idx] * k1 + b[idx] * k2) / k2sum;
        u1[idx] = a[idx] - dot * k1;
        u2[idx] = b[idx] - dot * k2;
    }
    SpectralVector::from_components_solenoidal(
        SpectralScalar::from_coeffs_unchecked(&g, u1),
        SpectralScalar::from_coeffs_unchecked(&g, u2),
    )
}

/// Zeroes every mode with Euclidean magnitude `|k| > n`.
pub fn galerkin_project(u: &SpectralVector, n: usize) -> Result<SpectralVector> {
    if n < 1 {
        return Err(Error::InvalidParameter("Galerkin truncation requires n >= 1".into()));
    }
    let mut out = u.clone();
    for c in out.components_mut() {
        galerkin_project_scalar_in_place(c, n);
    }
    Ok(out)
}

pub(crate) fn galerkin_project_scalar_in_place(f: &mut SpectralScalar, n: usize) {
    let g = f.grid().clone();
    let limit = (n * n) as f64;
    for (idx, c) in f.coeffs_mut().iter_mut().enumerate() {
        if g.k_squared(idx) > limit {
            *c = Complex64::default();
        }
    }
}

/// Zeroes modes with `max(|k1|,|k2|)` above the grid's dealiasing cutoff.
pub fn dealias(f: &SpectralScalar) -> SpectralScalar {
    let mut out = f.clone();
    dealias_in_place(&mut out);
    out
}

pub(crate) fn dealias_in_place(f: &mut SpectralScalar) {
    let g = f.grid().clone();
    for (idx, c) in f.coeffs_mut().iter_mut().enumerate() {
        if !g.is_dealiased_mode(idx) {
            *c = Complex64::default();
        }
    }
}

pub fn dealias_vector(u: &SpectralVector) -> SpectralVector {
    let mut out = u.clone();
    for c in out.components_mut() {
        dealias_in_place(c);
    }
    out
}

/// True when modes beyond the dealiasing cutoff are at round-off level.
pub fn is_dealiased(f: &SpectralScalar) -> bool {
    let g = f.grid().clone();
    f.is_supported_on(|i| g.is_dealiased_mode(i))
}

/// Pseudo-spectral product of two sampled fields, transformed and dealiased.
pub(crate) fn dealiased_product(a: &[f64], b: &[f64], grid: &std::sync::Arc<super::FourierGrid>) -> SpectralScalar {
    let samples: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    let mut out = PhysicalScalar::new(grid, samples).expect("sample count matches grid").to_spectral();
    dealias_in_place(&mut out);
    out
}

/// Dealiased pseudo-spectral convective term `(u . grad) u`, not projected.
pub fn convective_term(u: &SpectralVector) -> SpectralVector {
    let g = u.grid().clone();
    let [p1, p2] = u.to_physical_unchecked();
    let mut out = Vec::with_capacity(2);
    for comp in u.components() {
        let d1 = differentiate(comp, Axis::X1).to_physical_unchecked();
        let d2 = differentiate(comp, Axis::X2).to_physical_unchecked();
        let samples: Vec<f64> = (0..g.len())
            .map(|i| p1.samples()[i] * d1.samples()[i] + p2.samples()[i] * d2.samples()[i])
            .collect();
        let mut c = PhysicalScalar::new(&g, samples).expect("sample count").to_spectral();
        dealias_in_place(&mut c);
        out.push(c);
    }
    let u2 = out.pop().unwrap();
    let u1 = out.pop().unwrap();
    SpectralVector::from_components(u1, u2)
}

/// Pressure solving `-lap p = div((u . grad) u)` with zero mean.
pub fn pressure_recover(u: &SpectralVector) -> SpectralScalar {
    let g = u.grid().clone();
    let n = g.n();
    let conv = convective_term(u);
    let (a, b) = (conv.component(0).coeffs(), conv.component(1).coeffs());
    let coeffs = (0..g.len())
        .map(|idx| {
            let k2 = g.k_squared(idx);
            if k2 == 0.0 {
                return Complex64::default();
            }
            let (k1, kk2) = (g.deriv_wavenumber(idx / n), g.deriv_wavenumber(idx % n));
            Complex64::new(0.0, 1.0) * (a[idx] * k1 + b[idx] * kk2) / k2
        })
        .collect();
    SpectralScalar::from_coeffs_unchecked(&g, coeffs)
}

/// Checks that two fields live on the same grid.
pub fn same_grid(a: &SpectralScalar, b: &SpectralScalar) -> Result<()> {
    check_same_grid(a.grid(), b.grid())
}
