use std::sync::Arc;

use num_complex::Complex64;

use super::grid::FourierGrid;
use crate::error::{Error, Result};

/// Relative tolerance used when validating Hermitian symmetry of inputs.
const HERMITIAN_TOL: f64 = 1e-10;
/// Divergence-free flag tolerance: `|k . u(k)| <= tol * |u(k)|`.
pub const DIVERGENCE_TOL: f64 = 1e-12;
/// Coefficients below this fraction of the largest one are treated as round-off.
pub const NOISE_FLOOR: f64 = 1e-13;

pub(crate) fn check_same_grid(a: &FourierGrid, b: &FourierGrid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch { left: a.n(), right: b.n() })
    }
}

/// Real periodic scalar field stored as Fourier-series coefficients,
/// `f(x) = sum_k c_k exp(i k.x)`.
#[derive(Clone, Debug)]
pub struct SpectralScalar {
    grid: Arc<FourierGrid>,
    coeffs: Vec<Complex64>,
}

/// Samples of a scalar field at the collocation points.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalScalar {
    grid: Arc<FourierGrid>,
    samples: Vec<f64>,
}

/// Two-component velocity-like field. `divergence_free` records whether the
/// coefficients satisfied `|k . u(k)| <= 1e-12 |u(k)|` when the value was built.
#[derive(Clone, Debug)]
pub struct SpectralVector {
    comps: [SpectralScalar; 2],
    divergence_free: bool,
}

impl SpectralScalar {
    pub fn zeros(grid: &Arc<FourierGrid>) -> Self {
        Self { grid: grid.clone(), coeffs: vec![Complex64::default(); grid.len()] }
    }

    /// Wraps raw coefficients after checking length and Hermitian symmetry.
    pub fn from_coeffs(grid: &Arc<FourierGrid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        let field = Self { grid: grid.clone(), coeffs };
        field.check_hermitian()?;
        Ok(field)
    }

    pub(crate) fn from_coeffs_unchecked(grid: &Arc<FourierGrid>, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid: grid.clone(), coeffs }
    }

    /// Builds a field from a list of `(k1, k2, c)` modes; conjugate partners are
    /// filled in automatically, so each pair should be listed once.
    pub fn from_modes(grid: &Arc<FourierGrid>, modes: &[(i64, i64, Complex64)]) -> Result<Self> {
        let mut coeffs = vec![Complex64::default(); grid.len()];
        for &(k1, k2, c) in modes {
            let idx = grid.index_of(k1, k2).ok_or_else(|| {
                Error::InvalidParameter(format!("mode ({k1},{k2}) not representable on N={}", grid.n()))
            })?;
            let conj = grid.conjugate_index(idx);
            if idx == conj {
                coeffs[idx] += Complex64::new(c.re, 0.0);
            } else {
                coeffs[idx] += c;
                coeffs[conj] += c.conj();
            }
        }
        Ok(Self { grid: grid.clone(), coeffs })
    }

    pub fn grid(&self) -> &Arc<FourierGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        self.grid.index_of(k1, k2).map(|i| self.coeffs[i]).unwrap_or_default()
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// True when every coefficient outside `keep` is at round-off level.
    pub fn is_supported_on(&self, keep: impl Fn(usize) -> bool) -> bool {
        let floor = NOISE_FLOOR * self.max_coeff();
        self.coeffs.iter().enumerate().all(|(i, c)| keep(i) || c.norm() <= floor)
    }

    /// Largest violation of `c(-k) = conj(c(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[i] - self.coeffs[self.grid.conjugate_index(i)].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let defect = self.hermitian_defect();
        if defect > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) && defect > 1e-300 {
            return Err(Error::NonHermitian { defect });
        }
        Ok(())
    }

    pub fn check_zero_mean(&self, tol: f64) -> Result<()> {
        let mean = self.coeffs[0].norm();
        if mean > tol {
            return Err(Error::NonzeroMean { mean });
        }
        Ok(())
    }

    /// Replaces the coefficients by their Hermitian part, removing round-off.
    pub(crate) fn symmetrize(&mut self) {
        for i in 0..self.coeffs.len() {
            let j = self.grid.conjugate_index(i);
            if j < i {
                continue;
            }
            if i == j {
                self.coeffs[i].im = 0.0;
            } else {
                let avg = 0.5 * (self.coeffs[i] + self.coeffs[j].conj());
                self.coeffs[i] = avg;
                self.coeffs[j] = avg.conj();
            }
        }
    }

    pub fn to_physical(&self) -> Result<PhysicalScalar> {
        self.check_hermitian()?;
        Ok(self.to_physical_unchecked())
    }

    pub(crate) fn to_physical_unchecked(&self) -> PhysicalScalar {
        let mut buf = self.coeffs.clone();
        self.grid.inverse_fft(&mut buf);
        PhysicalScalar { grid: self.grid.clone(), samples: buf.into_iter().map(|c| c.re).collect() }
    }

    /// Evaluates the field on a finer grid by zero-padding the spectrum.
    pub fn resample(&self, target: &Arc<FourierGrid>) -> SpectralScalar {
        let mut out = SpectralScalar::zeros(target);
        let half = (target.n().min(self.grid.n()) / 2) as i64;
        for (idx, &c) in self.coeffs.iter().enumerate() {
            if c == Complex64::default() {
                continue;
            }
            let (k1, k2) = self.grid.wavevector(idx);
            // Modes at either Nyquist index are dropped when changing resolution.
            if k1.abs() >= half || k2.abs() >= half {
                continue;
            }
            if let Some(j) = target.index_of(k1, k2) {
                out.coeffs[j] = c;
            }
        }
        out
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { grid: self.grid.clone(), coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x * a + y * b).collect(),
        })
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `sum_k |c_k|^2 (2 pi)^2 w(k)` in a fixed sequential order.
    pub(crate) fn weighted_energy(&self, weight: impl Fn(usize) -> f64) -> f64 {
        let domain = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        self.coeffs.iter().enumerate().map(|(i, c)| c.norm_sqr() * weight(i)).sum::<f64>() * domain
    }

    /// Real L2 inner product `int f g dx`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        check_same_grid(&self.grid, &other.grid)?;
        let domain = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a * b.conj()).re).sum::<f64>() * domain)
    }
}

impl PhysicalScalar {
    pub fn new(grid: &Arc<FourierGrid>, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        Ok(Self { grid: grid.clone(), samples })
    }

    /// Samples `f` at every collocation point.
    pub fn from_fn(grid: &Arc<FourierGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let samples = (0..grid.len())
            .map(|i| {
                let [x1, x2] = grid.point(i);
                f(x1, x2)
            })
            .collect();
        Self { grid: grid.clone(), samples }
    }

    pub fn grid(&self) -> &Arc<FourierGrid> {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn to_spectral(&self) -> SpectralScalar {
        let mut buf: Vec<Complex64> = self.samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        self.grid.forward_fft(&mut buf);
        let mut out = SpectralScalar { grid: self.grid.clone(), coeffs: buf };
        out.symmetrize();
        out
    }
}

impl SpectralVector {
    pub fn new(u1: SpectralScalar, u2: SpectralScalar) -> Result<Self> {
        check_same_grid(u1.grid(), u2.grid())?;
        u1.check_hermitian()?;
        u2.check_hermitian()?;
        Ok(Self::from_components(u1, u2))
    }

    pub(crate) fn from_components(u1: SpectralScalar, u2: SpectralScalar) -> Self {
        let mut v = Self { comps: [u1, u2], divergence_free: false };
        v.divergence_free = v.divergence_defect() <= DIVERGENCE_TOL;
        v
    }

    /// For results of projections that are divergence-free by construction.
    pub(crate) fn from_components_solenoidal(u1: SpectralScalar, u2: SpectralScalar) -> Self {
        Self { comps: [u1, u2], divergence_free: true }
    }

    pub fn zeros(grid: &Arc<FourierGrid>) -> Self {
        Self { comps: [SpectralScalar::zeros(grid), SpectralScalar::zeros(grid)], divergence_free: true }
    }

    pub fn grid(&self) -> &Arc<FourierGrid> {
        self.comps[0].grid()
    }

    pub fn component(&self, axis: usize) -> &SpectralScalar {
        &self.comps[axis]
    }

    pub fn components(&self) -> &[SpectralScalar; 2] {
        &self.comps
    }

    pub(crate) fn components_mut(&mut self) -> &mut [SpectralScalar; 2] {
        &mut self.comps
    }

    pub fn into_components(self) -> [SpectralScalar; 2] {
        self.comps
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divergence_free
    }

    /// Largest `|k . u(k)| / (|k| |u(k)|)` over modes above the round-off floor
    /// `NOISE_FLOOR * max |u(k)|`.
    pub fn divergence_defect(&self) -> f64 {
        let g = self.grid();
        let (a, b) = (self.comps[0].coeffs(), self.comps[1].coeffs());
        let scale = (0..g.len()).map(|i| (a[i].norm_sqr() + b[i].norm_sqr()).sqrt()).fold(0.0, f64::max);
        (0..g.len())
            .filter_map(|i| {
                let mag = (a[i].norm_sqr() + b[i].norm_sqr()).sqrt();
                if mag == 0.0 || mag <= NOISE_FLOOR * scale {
                    return None;
                }
                let (k1, k2) = g.wavevector(i);
                let kn = ((k1 * k1 + k2 * k2) as f64).sqrt().max(1.0);
                Some((a[i] * k1 as f64 + b[i] * k2 as f64).norm() / (mag * kn))
            })
            .fold(0.0, f64::max)
    }

    pub fn mean(&self) -> [f64; 2] {
        [self.comps[0].mean(), self.comps[1].mean()]
    }

    pub fn to_physical(&self) -> Result<[PhysicalScalar; 2]> {
        Ok([self.comps[0].to_physical()?, self.comps[1].to_physical()?])
    }

    pub(crate) fn to_physical_unchecked(&self) -> [PhysicalScalar; 2] {
        [self.comps[0].to_physical_unchecked(), self.comps[1].to_physical_unchecked()]
    }

    pub fn resample(&self, target: &Arc<FourierGrid>) -> SpectralVector {
        let mut v = Self::from_components_solenoidal(self.comps[0].resample(target), self.comps[1].resample(target));
        v.divergence_free = self.divergence_free;
        v
    }

    fn map_pair(&self, other: &Self, a: f64, b: f64) -> Result<Self> {
        let u1 = self.comps[0].combine(a, &other.comps[0], b)?;
        let u2 = self.comps[1].combine(a, &other.comps[1], b)?;
        Ok(Self { comps: [u1, u2], divergence_free: self.divergence_free && other.divergence_free })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.map_pair(other, 1.0, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.map_pair(other, 1.0, -1.0)
    }

    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.map_pair(other, a, b)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { comps: [self.comps[0].scaled(a), self.comps[1].scaled(a)], divergence_free: self.divergence_free }
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(SpectralScalar::is_finite)
    }

    /// Real L2 inner product `int u . v dx`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        Ok(self.comps[0].inner(&other.comps[0])? + self.comps[1].inner(&other.comps[1])?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_round_trip() {
        let g = FourierGrid::new(16).unwrap();
        let z = SpectralScalar::zeros(&g);
        assert!(z.to_physical().unwrap().samples().iter().all(|&s| s == 0.0));
        let p = PhysicalScalar::new(&g, vec![0.0; 256]).unwrap();
        assert!(p.to_spectral().coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn single_cosine_mode() {
        let g = FourierGrid::new(16).unwrap();
        let f = SpectralScalar::from_modes(&g, &[(1, 0, Complex64::new(0.5, 0.0))]).unwrap();
        let p = f.to_physical().unwrap();
        for (i, s) in p.samples().iter().enumerate() {
            let [x1, _] = g.point(i);
            assert!((s - x1.cos()).abs() <= 1e-12);
        }
    }

    #[test]
    fn rejects_non_hermitian_and_mismatch() {
        let g = FourierGrid::new(8).unwrap();
        let mut c = vec![Complex64::default(); 64];
        c[1] = Complex64::new(1.0, 0.0);
        assert!(matches!(SpectralScalar::from_coeffs(&g, c), Err(Error::NonHermitian { .. })));
        let h = FourierGrid::new(16).unwrap();
        let a = SpectralScalar::zeros(&g);
        let b = SpectralScalar::zeros(&h);
        assert!(matches!(a.add(&b), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn inner_product_of_sines() {
        let g = FourierGrid::new(16).unwrap();
        let s = PhysicalScalar::from_fn(&g, |_, x2| x2.sin()).to_spectral();
        assert!((s.inner(&s).unwrap() - 2.0 * PI * PI).abs() < 1e-12);
    }
}
