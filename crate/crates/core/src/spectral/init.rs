//! Analytic and seeded random initial fields.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::field::{SpectralScalar, SpectralVector};
use super::grid::FourierGrid;
use super::norm::{vector_norm, NormKind};
use super::ops::biot_savart;
use crate::error::{Error, Result};

/// `(sin x1 cos x2, -cos x1 sin x2)`, vorticity `2 sin x1 sin x2`.
pub fn taylor_green(grid: &Arc<FourierGrid>) -> SpectralVector {
    let q = Complex64::new(0.0, 0.25);
    let u1 = SpectralScalar::from_modes(grid, &[(1, 1, -q), (1, -1, -q)]).expect("N >= 8");
    let u2 = SpectralScalar::from_modes(grid, &[(1, 1, q), (1, -1, -q)]).expect("N >= 8");
    SpectralVector::from_components(u1, u2)
}

/// `(sin x2, 0)`.
pub fn shear(grid: &Arc<FourierGrid>) -> SpectralVector {
    let u1 = SpectralScalar::from_modes(grid, &[(0, 1, Complex64::new(0.0, -0.5))]).expect("N >= 8");
    SpectralVector::from_components(u1, SpectralScalar::zeros(grid))
}

/// Parameters of the seeded random vorticity spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomSpectrum {
    /// Largest Euclidean wavenumber `|k|` carrying energy.
    pub band: usize,
    /// Vorticity amplitude decays like `|k|^-slope`.
    pub slope: f64,
    /// Target `||u||_L2`; the default `2 pi` is unit rms velocity.
    pub l2_norm: f64,
}

impl Default for RandomSpectrum {
    fn default() -> Self {
        Self { band: 8, slope: 2.0, l2_norm: 2.0 * PI }
    }
}

/// Seeded random vorticity with Gaussian coefficients on `1 <= |k| <= band`.
pub fn random_vorticity(grid: &Arc<FourierGrid>, spec: RandomSpectrum, seed: u64) -> Result<SpectralScalar> {
    if spec.band < 1 || spec.band > grid.dealias_cutoff() {
        return Err(Error::InvalidParameter(format!(
            "band {} must lie in [1, cutoff = {}]",
            spec.band,
            grid.dealias_cutoff()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = spec.band as i64;
    let mut modes = Vec::new();
    // one representative per conjugate pair: k1 > 0, or k1 = 0 and k2 > 0
    for k1 in 0..=b {
        for k2 in -b..=b {
            if (k1 == 0 && k2 <= 0) || k1 * k1 + k2 * k2 > b * b {
                continue;
            }
            let kn = ((k1 * k1 + k2 * k2) as f64).sqrt();
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let amp = kn.powf(-spec.slope) / 2f64.sqrt();
            modes.push((k1, k2, Complex64::new(re * amp, im * amp)));
        }
    }
    SpectralScalar::from_modes(grid, &modes)
}

/// Divergence-free band-limited velocity from a seeded random vorticity,
/// normalized to `spec.l2_norm`.
pub fn random_velocity(grid: &Arc<FourierGrid>, spec: RandomSpectrum, seed: u64) -> Result<SpectralVector> {
    let w = random_vorticity(grid, spec, seed)?;
    let u = biot_savart(&w)?;
    let norm = vector_norm(&u, NormKind::L2)?;
    Ok(u.scaled(spec.l2_norm / norm))
}
