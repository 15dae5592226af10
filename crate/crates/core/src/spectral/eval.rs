//! Off-grid evaluation of band-limited fields by direct trigonometric summation.

use num_complex::Complex64;

use super::field::{SpectralScalar, SpectralVector};

/// Sparse list of the nonzero Fourier modes of one or more scalar fields.
/// Evaluation at a point costs `O(band + modes)`.
#[derive(Clone, Debug)]
pub struct ModalField {
    modes: Vec<(i64, i64)>,
    /// `coeffs[m * comps + c]`
    coeffs: Vec<Complex64>,
    comps: usize,
    band: i64,
}

impl ModalField {
    pub fn from_scalar(f: &SpectralScalar) -> Self {
        Self::build(&[f])
    }

    pub fn from_vector(u: &SpectralVector) -> Self {
        let [a, b] = u.components();
        Self::build(&[a, b])
    }

    /// `(1 - theta) a + theta b`, componentwise.
    pub fn lerp_vectors(a: &SpectralVector, b: &SpectralVector, theta: f64) -> Self {
        if theta == 0.0 {
            return Self::from_vector(a);
        }
        let mix = a.combine(1.0 - theta, b, theta).expect("path states share a grid");
        Self::from_vector(&mix)
    }

    fn build(fields: &[&SpectralScalar]) -> Self {
        let g = fields[0].grid();
        let comps = fields.len();
        let mut modes = Vec::new();
        let mut coeffs = Vec::new();
        let mut band = 0;
        for idx in 0..g.len() {
            if fields.iter().all(|f| f.coeffs()[idx] == Complex64::default()) {
                continue;
            }
            let (k1, k2) = g.wavevector(idx);
            band = band.max(k1.abs()).max(k2.abs());
            modes.push((k1, k2));
            coeffs.extend(fields.iter().map(|f| f.coeffs()[idx]));
        }
        Self { modes, coeffs, comps, band }
    }

    pub fn components(&self) -> usize {
        self.comps
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    /// Writes the value of every component at `x` into `out`.
    pub fn eval_into(&self, x: [f64; 2], out: &mut [f64]) {
        let b = self.band as usize;
        let mut e1 = vec![Complex64::new(1.0, 0.0); 2 * b + 1];
        let mut e2 = vec![Complex64::new(1.0, 0.0); 2 * b + 1];
        fill_powers(&mut e1, x[0], b);
        fill_powers(&mut e2, x[1], b);
        let mut acc = vec![Complex64::default(); self.comps];
        for (m, &(k1, k2)) in self.modes.iter().enumerate() {
            let phase = e1[(k1 + self.band) as usize] * e2[(k2 + self.band) as usize];
            for (c, a) in acc.iter_mut().enumerate() {
                *a += self.coeffs[m * self.comps + c] * phase;
            }
        }
        for (o, a) in out.iter_mut().zip(acc) {
            *o = a.re;
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> Vec<f64> {
        let mut out = vec![0.0; self.comps];
        self.eval_into(x, &mut out);
        out
    }

    pub fn eval2(&self, x: [f64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        self.eval_into(x, &mut out);
        out
    }
}

/// `e[b + m] = exp(i m x)` for `|m| <= b`.
fn fill_powers(e: &mut [Complex64], x: f64, b: usize) {
    // Direct cis() for each entry keeps the error independent of |m|.
    for m in 1..=b {
        let (s, c) = (m as f64 * x).sin_cos();
        e[b + m] = Complex64::new(c, s);
        e[b - m] = Complex64::new(c, -s);
    }
}

/// Evaluates a vector field at arbitrary points.
pub fn eval_velocity(u: &SpectralVector, points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let modal = ModalField::from_vector(u);
    crate::par::map_slice(points, |&p| modal.eval2(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{init, FourierGrid};
    use std::f64::consts::PI;

    #[test]
    fn shear_and_taylor_green_points() {
        let g = FourierGrid::new(16).unwrap();
        let v = eval_velocity(&init::shear(&g), &[[0.0, PI / 2.0]]);
        assert!((v[0][0] - 1.0).abs() < 1e-15 && v[0][1].abs() < 1e-15);
        let v = eval_velocity(&init::taylor_green(&g), &[[PI / 2.0, PI / 2.0]]);
        assert!(v[0][0].abs() < 1e-15 && v[0][1].abs() < 1e-15);
    }

    #[test]
    fn matches_collocation_samples() {
        let g = FourierGrid::new(32).unwrap();
        let spec = init::RandomSpectrum { band: 10, ..Default::default() };
        let u = init::random_velocity(&g, spec, 3).unwrap();
        let [p1, p2] = u.to_physical().unwrap();
        let vals = eval_velocity(&u, &g.points());
        for (i, v) in vals.iter().enumerate() {
            assert!((v[0] - p1.samples()[i]).abs() < 1e-12);
            assert!((v[1] - p2.samples()[i]).abs() < 1e-12);
        }
    }
}
