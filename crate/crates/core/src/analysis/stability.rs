use super::residual::{euler_residual, strain_negative_part_sup};
use crate::dynamics::{cumulative_trapezoid, trapezoid, SolutionPath};
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{vector_norm, vector_norm_with, NormKind, NormOptions};

/// Relative slack on both stability inequalities.
pub const STABILITY_TOL: f64 = 1e-3;

/// Weak-strong comparison of a path `u` against a regular path `v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityReport {
    /// `sup_t ||u_t - v_t||_L2`.
    pub lhs: f64,
    /// `exp(int_0^T ||grad v||_inf dt)`.
    pub weight: f64,
    /// `weight * ||u_0 - v_0||_L2`.
    pub rhs: f64,
    pub satisfied: bool,
    /// Right side of the dissipative inequality at the final time,
    /// including the signed residual term.
    pub dissipative_rhs: f64,
    /// `||u_T - v_T||_L2^2`, the matching left side.
    pub dissipative_lhs: f64,
    /// The dissipative inequality holds at every stored time.
    pub dissipative_satisfied: bool,
}

pub fn weak_strong_report(u: &SolutionPath, v: &SolutionPath) -> Result<StabilityReport> {
    u.check_compatible(v)?;
    if u.states()[0].grid() != v.states()[0].grid() {
        return Err(Error::GridMismatch { left: u.states()[0].grid().n(), right: v.states()[0].grid().n() });
    }
    let h = v.dt();
    let len = v.len();
    let opts = NormOptions { oversample: true };
    let per_time = par::map_range(len, |i| -> Result<(f64, f64, f64, f64)> {
        let w = u.states()[i].sub(&v.states()[i])?;
        let dist = vector_norm(&w, NormKind::L2)?;
        let grad = vector_norm_with(&v.states()[i], NormKind::GradSup, opts)?;
        let strain = strain_negative_part_sup(&v.states()[i]);
        let pairing = if len >= 3 { euler_residual(v, i)?.inner(&w)? } else { 0.0 };
        Ok((dist, grad, strain, pairing))
    });
    let per_time = per_time.into_iter().collect::<Result<Vec<_>>>()?;
    let dist: Vec<f64> = per_time.iter().map(|p| p.0).collect();
    let grad: Vec<f64> = per_time.iter().map(|p| p.1).collect();
    let strain: Vec<f64> = per_time.iter().map(|p| p.2).collect();
    let pairing: Vec<f64> = per_time.iter().map(|p| p.3).collect();

    let lhs = dist.iter().copied().fold(0.0, f64::max);
    let weight = trapezoid(&grad, h).exp();
    let rhs = weight * dist[0];
    let satisfied = lhs <= rhs * (1.0 + STABILITY_TOL);

    // rhs(t) = e^{2A(t)} |w_0|^2 + 2 int_0^t e^{2(A(t) - A(s))} (E(v_s), w_s) ds
    let a = cumulative_trapezoid(&strain, h);
    let w0 = dist[0] * dist[0];
    let mut dissipative_satisfied = true;
    let mut dissipative_rhs = w0;
    for i in 0..len {
        let integrand: Vec<f64> = (0..=i).map(|j| (2.0 * (a[i] - a[j])).exp() * pairing[j]).collect();
        let r = (2.0 * a[i]).exp() * w0 + 2.0 * trapezoid(&integrand, h);
        let l = dist[i] * dist[i];
        if l > r.max(0.0) * (1.0 + STABILITY_TOL) + f64::EPSILON * w0 {
            dissipative_satisfied = false;
        }
        dissipative_rhs = r;
    }
    let dissipative_lhs = dist[len - 1] * dist[len - 1];
    Ok(StabilityReport { lhs, weight, rhs, satisfied, dissipative_rhs, dissipative_lhs, dissipative_satisfied })
}

/// `C[i][j] = sup_t ||u^i_t - u^j_t||_L2`, symmetric with zero diagonal.
pub fn cauchy_matrix(paths: &[SolutionPath]) -> Result<Vec<Vec<f64>>> {
    for p in paths.iter().skip(1) {
        paths[0].check_compatible(p)?;
    }
    let m = paths.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let vals = par::map_slice(&pairs, |&(i, j)| -> Result<f64> {
        let mut sup: f64 = 0.0;
        for (a, b) in paths[i].states().iter().zip(paths[j].states()) {
            sup = sup.max(vector_norm(&a.sub(b)?, NormKind::L2)?);
        }
        Ok(sup)
    });
    let mut out = vec![vec![0.0; m]; m];
    for (&(i, j), v) in pairs.iter().zip(vals) {
        let v = v?;
        out[i][j] = v;
        out[j][i] = v;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{run_velocity, RunOptions, SystemSpec};
    use crate::spectral::init::{self, RandomSpectrum};
    use crate::spectral::{galerkin_project, FourierGrid};

    #[test]
    fn identical_paths() {
        let g = FourierGrid::new(16).unwrap();
        let u0 = init::random_velocity(&g, RandomSpectrum { band: 4, ..Default::default() }, 1).unwrap();
        let p = run_velocity(&SystemSpec::EulerGalerkin { n: 5 }, &u0, 0.1, 0.01, RunOptions::default()).unwrap();
        let r = weak_strong_report(&p, &p).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
        assert!(r.satisfied && r.dissipative_satisfied);
        let c = cauchy_matrix(&[p.clone(), p]).unwrap();
        assert_eq!(c, vec![vec![0.0; 2]; 2]);
    }

    #[test]
    fn perturbed_taylor_green() {
        let g = FourierGrid::new(32).unwrap();
        let spec = SystemSpec::EulerGalerkin { n: 10 };
        let tg = init::taylor_green(&g);
        let delta = galerkin_project(&init::random_velocity(&g, RandomSpectrum::default(), 3).unwrap(), 10).unwrap();
        let u0 = tg.combine(1.0, &delta, 1e-3).unwrap();
        let v = run_velocity(&spec, &tg, 0.5, 0.005, RunOptions::default()).unwrap();
        let u = run_velocity(&spec, &u0, 0.5, 0.005, RunOptions::default()).unwrap();
        let r = weak_strong_report(&u, &v).unwrap();
        assert!(r.satisfied && r.dissipative_satisfied, "{r:?}");
        // grad sup of Taylor-Green is sqrt(2)
        assert!((r.weight - (2f64.sqrt() * 0.5).exp()).abs() < 1e-9);
        assert!(r.lhs > 0.0);
    }
}
