//! Norms on the torus. L2 and H^s are Parseval sums; L^p, sup and gradient
//! sup are quadratures / maxima over the collocation grid, optionally on a
//! 2x zero-padded grid.

use std::sync::Arc;

use super::field::{SpectralScalar, SpectralVector};
use super::grid::FourierGrid;
use super::ops::{curl2d, differentiate, Axis};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind {
    L2,
    /// Inhomogeneous Sobolev norm with multiplier `(1+|k|^2)^{s/2}`.
    Hs(f64),
    /// `p = f64::INFINITY` is accepted and equals `Sup`.
    Lp(f64),
    Sup,
    /// Max over grid points of the Frobenius norm of the velocity gradient.
    GradSup,
    /// `||u||_L2 + ||curl u||_Lp`.
    Wp(f64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NormOptions {
    /// Evaluate grid norms on a zero-padded grid of twice the resolution.
    pub oversample: bool,
}

fn validate(kind: NormKind) -> Result<()> {
    match kind {
        NormKind::Hs(s) if !(s >= 0.0) => Err(Error::InvalidParameter(format!("Sobolev index s = {s} < 0"))),
        NormKind::Lp(p) | NormKind::Wp(p) if !(p >= 1.0) => Err(Error::InvalidParameter(format!("exponent p = {p} < 1"))),
        _ => Ok(()),
    }
}

fn eval_grid(grid: &Arc<FourierGrid>, opts: NormOptions) -> Result<Arc<FourierGrid>> {
    if opts.oversample {
        FourierGrid::with_cutoff(2 * grid.n(), grid.dealias_cutoff())
    } else {
        Ok(grid.clone())
    }
}

/// Samples of a list of scalar fields on the evaluation grid.
fn samples(fields: &[&SpectralScalar], opts: NormOptions) -> Result<(Arc<FourierGrid>, Vec<Vec<f64>>)> {
    let grid = eval_grid(fields[0].grid(), opts)?;
    let out = fields
        .iter()
        .map(|f| {
            if opts.oversample {
                f.resample(&grid).to_physical_unchecked().into_samples()
            } else {
                f.to_physical_unchecked().into_samples()
            }
        })
        .collect();
    Ok((grid, out))
}

/// Pointwise magnitude of a (possibly multi-component) sampled field.
fn magnitudes(comps: &[Vec<f64>]) -> Vec<f64> {
    (0..comps[0].len()).map(|i| comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt()).collect()
}

fn lp_of(mags: &[f64], p: f64, cell: f64) -> f64 {
    if p.is_infinite() {
        mags.iter().copied().fold(0.0, f64::max)
    } else {
        (mags.iter().map(|m| m.powf(p)).sum::<f64>() * cell).powf(1.0 / p)
    }
}

fn sobolev(fields: &[&SpectralScalar], s: f64) -> f64 {
    let g = fields[0].grid();
    fields
        .iter()
        .map(|f| f.weighted_energy(|i| (1.0 + g.k_squared(i)).powf(s)))
        .sum::<f64>()
        .sqrt()
}

fn grid_norm(fields: &[&SpectralScalar], p: f64, opts: NormOptions) -> Result<f64> {
    let (grid, s) = samples(fields, opts)?;
    Ok(lp_of(&magnitudes(&s), p, grid.cell_area()))
}

pub fn scalar_norm(f: &SpectralScalar, kind: NormKind) -> Result<f64> {
    scalar_norm_with(f, kind, NormOptions::default())
}

pub fn scalar_norm_with(f: &SpectralScalar, kind: NormKind, opts: NormOptions) -> Result<f64> {
    validate(kind)?;
    match kind {
        NormKind::L2 => Ok(sobolev(&[f], 0.0)),
        NormKind::Hs(s) => Ok(sobolev(&[f], s)),
        NormKind::Lp(p) => grid_norm(&[f], p, opts),
        NormKind::Sup => grid_norm(&[f], f64::INFINITY, opts),
        NormKind::GradSup | NormKind::Wp(_) => {
            Err(Error::InvalidParameter(format!("{kind:?} is defined for vector fields only")))
        }
    }
}

pub fn vector_norm(u: &SpectralVector, kind: NormKind) -> Result<f64> {
    vector_norm_with(u, kind, NormOptions::default())
}

pub fn vector_norm_with(u: &SpectralVector, kind: NormKind, opts: NormOptions) -> Result<f64> {
    validate(kind)?;
    let [a, b] = u.components();
    match kind {
        NormKind::L2 => Ok(sobolev(&[a, b], 0.0)),
        NormKind::Hs(s) => Ok(sobolev(&[a, b], s)),
        NormKind::Lp(p) => grid_norm(&[a, b], p, opts),
        NormKind::Sup => grid_norm(&[a, b], f64::INFINITY, opts),
        NormKind::GradSup => {
            let d: Vec<SpectralScalar> = [a, b]
                .iter()
                .flat_map(|c| [differentiate(c, Axis::X1), differentiate(c, Axis::X2)])
                .collect();
            let refs: Vec<&SpectralScalar> = d.iter().collect();
            grid_norm(&refs, f64::INFINITY, opts)
        }
        NormKind::Wp(p) => {
            let w = curl2d(u);
            Ok(sobolev(&[a, b], 0.0) + grid_norm(&[&w], p, opts)?)
        }
    }
}

/// `||grad u||_L2^2 = sum |k|^2 |u(k)|^2 (2 pi)^2`, summed over components.
pub fn gradient_energy(u: &SpectralVector) -> f64 {
    u.components().iter().map(scalar_gradient_energy).sum()
}

pub fn scalar_gradient_energy(f: &SpectralScalar) -> f64 {
    let g = f.grid();
    f.weighted_energy(|i| g.k_squared(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{init, PhysicalScalar};
    use std::f64::consts::PI;

    #[test]
    fn shear_norms() {
        let g = FourierGrid::new(16).unwrap();
        let u = init::shear(&g);
        assert!((vector_norm(&u, NormKind::L2).unwrap() - PI * 2f64.sqrt()).abs() < 1e-13);
        assert!((vector_norm(&u, NormKind::Hs(1.0)).unwrap() - 2.0 * PI).abs() < 1e-13);
        assert!((vector_norm(&u, NormKind::GradSup).unwrap() - 1.0).abs() < 1e-14);
        assert!((vector_norm(&u, NormKind::Sup).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn taylor_green_w2() {
        let g = FourierGrid::new(32).unwrap();
        let u = init::taylor_green(&g);
        let w2 = vector_norm(&u, NormKind::Wp(2.0)).unwrap();
        // quadrature oracle: int sin^2 cos^2 = pi^2 per component, int 4 sin^2 sin^2 = 4 pi^2
        let l2 = (2.0 * PI * PI).sqrt();
        let wl2 = (4.0 * PI * PI).sqrt();
        assert!((w2 - (l2 + wl2)).abs() < 1e-12);
        assert!((w2 - (PI * 2f64.sqrt() + 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn lp_quadrature_matches_parseval() {
        let g = FourierGrid::new(32).unwrap();
        let f = PhysicalScalar::from_fn(&g, |x1, x2| (x1 + 2.0 * x2).sin() + 0.5 * (3.0 * x1).cos()).to_spectral();
        let a = scalar_norm(&f, NormKind::L2).unwrap();
        let b = scalar_norm(&f, NormKind::Lp(2.0)).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
        let c = scalar_norm_with(&f, NormKind::Lp(2.0), NormOptions { oversample: true }).unwrap();
        assert!((a - c).abs() < 1e-12 * a);
    }

    #[test]
    fn invalid_exponents() {
        let g = FourierGrid::new(8).unwrap();
        let f = SpectralScalar::zeros(&g);
        assert!(scalar_norm(&f, NormKind::Lp(0.5)).is_err());
        assert!(scalar_norm(&f, NormKind::Hs(-1.0)).is_err());
        assert!(scalar_norm(&f, NormKind::GradSup).is_err());
        assert!(vector_norm(&init::shear(&g), NormKind::Wp(0.0)).is_err());
    }
}
