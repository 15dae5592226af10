use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::par;

/// Uniform collocation grid on the torus `[0, 2pi)^2` with `n` points per axis.
///
/// Flat storage is row-major: index `i * n + j` holds the sample at
/// `(x1, x2) = (2 pi i / n, 2 pi j / n)`, or the Fourier coefficient with
/// wavenumber `(k(i), k(j))`, where `k(i) = i` for `i <= n/2` and `i - n` otherwise.
pub struct FourierGrid {
    n: usize,
    cutoff: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FourierGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierGrid")
            .field("n", &self.n)
            .field("cutoff", &self.cutoff)
            .finish()
    }
}

impl PartialEq for FourierGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.cutoff == other.cutoff
    }
}

impl FourierGrid {
    /// Grid with the 2/3-rule dealiasing cutoff `floor(n/3)`.
    pub fn new(n: usize) -> Result<Arc<Self>> {
        Self::with_cutoff(n, n / 3)
    }

    pub fn with_cutoff(n: usize, cutoff: usize) -> Result<Arc<Self>> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("resolution must be even and >= 8, got {n}")));
        }
        if cutoff > n / 2 {
            return Err(Error::InvalidGrid(format!("cutoff {cutoff} exceeds n/2 = {}", n / 2)));
        }
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            n,
            cutoff,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dealias_cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Quadrature weight of one collocation cell, `(2 pi / n)^2`.
    pub fn cell_area(&self) -> f64 {
        self.spacing() * self.spacing()
    }

    pub fn point(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        [(idx / self.n) as f64 * h, (idx % self.n) as f64 * h]
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Signed wavenumber of a 1D index, in `{-n/2+1, ..., n/2}`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Wavenumber used for differentiation: the Nyquist index maps to zero so
    /// derivatives of real fields stay real.
    pub fn deriv_wavenumber(&self, i: usize) -> f64 {
        if i == self.n / 2 {
            0.0
        } else {
            self.wavenumber(i) as f64
        }
    }

    pub fn wavevector(&self, idx: usize) -> (i64, i64) {
        (self.wavenumber(idx / self.n), self.wavenumber(idx % self.n))
    }

    pub fn k_squared(&self, idx: usize) -> f64 {
        let (a, b) = self.wavevector(idx);
        (a * a + b * b) as f64
    }

    /// Flat index of the mode `-k`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let (i, j) = (idx / self.n, idx % self.n);
        ((self.n - i) % self.n) * self.n + (self.n - j) % self.n
    }

    /// Flat index of wavevector `(k1, k2)`, if representable.
    pub fn index_of(&self, k1: i64, k2: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        let wrap = |k: i64| -> Option<usize> {
            if k > half || k <= -half {
                None
            } else if k >= 0 {
                Some(k as usize)
            } else {
                Some((k + self.n as i64) as usize)
            }
        };
        Some(wrap(k1)? * self.n + wrap(k2)?)
    }

    pub fn is_dealiased_mode(&self, idx: usize) -> bool {
        let (a, b) = self.wavevector(idx);
        a.unsigned_abs().max(b.unsigned_abs()) as usize <= self.cutoff
    }

    /// In-place unnormalized inverse transform: coefficients -> samples.
    pub(crate) fn inverse_fft(&self, data: &mut [Complex64]) {
        self.fft2(data, &self.inverse);
    }

    /// In-place forward transform including the `1/n^2` normalization.
    pub(crate) fn forward_fft(&self, data: &mut [Complex64]) {
        self.fft2(data, &self.forward);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }

    fn fft2(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(data.len(), self.len());
        self.fft_rows(data, plan);
        transpose(data, self.n);
        self.fft_rows(data, plan);
        transpose(data, self.n);
    }

    fn fft_rows(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let rows_per_task = (n / par::threads().max(1)).clamp(8, n);
        let scratch_len = plan.get_inplace_scratch_len();
        par::for_each_chunk_mut(
            data,
            rows_per_task * n,
            || vec![Complex64::default(); scratch_len],
            |scratch, rows| plan.process_with_scratch(rows, scratch),
        );
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_resolutions() {
        assert!(FourierGrid::new(6).is_err());
        assert!(FourierGrid::new(15).is_err());
        assert!(FourierGrid::with_cutoff(16, 9).is_err());
        let g = FourierGrid::new(16).unwrap();
        assert_eq!(g.dealias_cutoff(), 5);
    }

    #[test]
    fn wavenumber_layout() {
        let g = FourierGrid::new(8).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, 4, -3, -2, -1]);
        assert_eq!(g.deriv_wavenumber(4), 0.0);
        let idx = g.index_of(-2, 3).unwrap();
        assert_eq!(g.wavevector(idx), (-2, 3));
        assert_eq!(g.wavevector(g.conjugate_index(idx)), (2, -3));
        assert!(g.index_of(-4, 0).is_none());
    }
}
