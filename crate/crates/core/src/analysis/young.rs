use std::fmt;
use std::sync::Arc;

use crate::dynamics::{trapezoid, Path, SolutionPath};
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{vector_norm, FourierGrid, NormKind, SpectralScalar, SpectralVector};

type Integrand = Arc<dyn Fn(f64, [f64; 2], &[f64]) -> f64 + Send + Sync>;

/// A `p`-admissible integrand `Phi(t, x, z)` with
/// `|Phi(t, x, z)| <= bound * (1 + |z|)^p`.
#[derive(Clone)]
pub struct TestIntegrand {
    name: String,
    p: f64,
    bound: f64,
    phi: Integrand,
    recession: Option<Integrand>,
}

impl fmt::Debug for TestIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TestIntegrand({}, p={}, bound={})", self.name, self.p, self.bound)
    }
}

/// Magnitudes at which admissibility is probed, per coordinate direction.
const PROBE_RADII: [f64; 5] = [0.0, 1.0, 10.0, 1e3, 1e6];

impl TestIntegrand {
    pub fn new(
        name: &str,
        p: f64,
        bound: f64,
        phi: impl Fn(f64, [f64; 2], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(p >= 1.0) || !(bound > 0.0) {
            return Err(Error::InvalidParameter(format!("need p >= 1 and a positive bound, got p={p}, bound={bound}")));
        }
        Ok(Self { name: name.to_string(), p, bound, phi: Arc::new(phi), recession: None })
    }

    /// Attaches the `p`-recession function `lim_{s->inf} Phi(t, x, s z) / s^p`.
    pub fn with_recession(mut self, f: impl Fn(f64, [f64; 2], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.recession = Some(Arc::new(f));
        self
    }

    /// `|z|^2`, 2-homogeneous so it is its own recession function.
    pub fn energy() -> Self {
        let f = |_: f64, _: [f64; 2], z: &[f64]| z.iter().map(|v| v * v).sum::<f64>();
        Self { name: "energy".into(), p: 2.0, bound: 1.0, phi: Arc::new(f), recession: Some(Arc::new(f)) }
    }

    /// `w(t, x) . z` for a bounded weight `w` with `|w| <= bound`.
    pub fn linear(bound: f64, w: impl Fn(f64, [f64; 2]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        let w = Arc::new(w);
        let w2 = w.clone();
        let f = move |t: f64, x: [f64; 2], z: &[f64]| w(t, x).iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
        let rec = move |t: f64, x: [f64; 2], z: &[f64]| w2(t, x).iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
        Self { name: "linear".into(), p: 1.0, bound, phi: Arc::new(f), recession: Some(Arc::new(rec)) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn eval(&self, t: f64, x: [f64; 2], z: &[f64]) -> f64 {
        (self.phi)(t, x, z)
    }

    pub fn recession(&self, t: f64, x: [f64; 2], z: &[f64]) -> Option<f64> {
        self.recession.as_ref().map(|r| r(t, x, z))
    }

    fn violates(&self, t: f64, x: [f64; 2], z: &[f64]) -> Option<f64> {
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ratio = self.eval(t, x, z).abs() / (1.0 + norm).powf(self.p);
        (ratio > self.bound * (1.0 + 1e-12) || ratio.is_nan()).then_some(ratio)
    }

    /// Probes the growth bound along coordinate directions at large `|z|`.
    pub fn check_admissible(&self, dim: usize, times: &[f64]) -> Result<()> {
        let xs = [[0.0, 0.0], [1.0, 2.0], [3.0, 5.0]];
        for &t in times {
            for &x in &xs {
                for d in 0..dim {
                    for &r in &PROBE_RADII {
                        for sign in [1.0, -1.0] {
                            let mut z = vec![0.0; dim];
                            z[d] = sign * r;
                            if let Some(ratio) = self.violates(t, x, &z) {
                                return Err(Error::GrowthViolation(format!(
                                    "{}: |Phi|/(1+|z|)^{} = {ratio:.3e} exceeds {} at |z| = {r}",
                                    self.name, self.p, self.bound
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Fields whose point values can be fed to an integrand.
pub trait PointValues {
    fn grid(&self) -> &Arc<FourierGrid>;
    /// Component samples on the collocation grid.
    fn point_values(&self) -> Vec<Vec<f64>>;
}

impl PointValues for SpectralVector {
    fn grid(&self) -> &Arc<FourierGrid> {
        SpectralVector::grid(self)
    }

    fn point_values(&self) -> Vec<Vec<f64>> {
        self.to_physical_unchecked().into_iter().map(|p| p.into_samples()).collect()
    }
}

impl PointValues for SpectralScalar {
    fn grid(&self) -> &Arc<FourierGrid> {
        SpectralScalar::grid(self)
    }

    fn point_values(&self) -> Vec<Vec<f64>> {
        vec![self.to_physical_unchecked().into_samples()]
    }
}

/// `int_0^T int Phi(t, x, u_t(x)) dx dt` for the atomic measure `delta_u`,
/// by grid quadrature in space and trapezoid in time. Every evaluated point
/// is checked against the integrand's growth bound.
pub fn young_pairing<S: PointValues + Sync>(path: &Path<S>, phi: &TestIntegrand) -> Result<f64> {
    let dim = path.states()[0].point_values().len();
    phi.check_admissible(dim, &[0.0, path.final_time()])?;
    let per_time = par::map_range(path.len(), |i| -> Result<f64> {
        let t = path.times()[i];
        let s = &path.states()[i];
        let g = s.grid();
        let vals = s.point_values();
        let mut z = vec![0.0; dim];
        let mut acc = 0.0;
        for (idx, x) in g.points().into_iter().enumerate() {
            for (c, v) in vals.iter().enumerate() {
                z[c] = v[idx];
            }
            if let Some(ratio) = phi.violates(t, x, &z) {
                return Err(Error::GrowthViolation(format!(
                    "{}: growth ratio {ratio:.3e} at t = {t}, x = {x:?}",
                    phi.name
                )));
            }
            acc += phi.eval(t, x, &z);
        }
        Ok(acc * g.cell_area())
    });
    let vals = per_time.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(trapezoid(&vals, path.dt()))
}

/// Pairing with the empirical measure `(1/m) sum_i delta_{u^i}`.
pub fn ensemble_pairing<S: PointValues + Sync>(paths: &[Path<S>], phi: &TestIntegrand) -> Result<f64> {
    if paths.is_empty() {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    }
    let mut total = 0.0;
    for p in paths {
        paths[0].check_compatible(p)?;
        total += young_pairing(p, phi)?;
    }
    Ok(total / paths.len() as f64)
}

fn barycenter(fields: &[&SpectralVector]) -> Result<SpectralVector> {
    let m = fields.len() as f64;
    let mut acc = fields[0].scaled(1.0 / m);
    for f in &fields[1..] {
        acc = acc.combine(1.0, f, 1.0 / m)?;
    }
    Ok(acc)
}

/// `(1/m) sum ||u^i||^2 - ||(1/m) sum u^i||^2` for one time slice.
pub fn jensen_gap_fields(fields: &[&SpectralVector]) -> Result<f64> {
    if fields.is_empty() {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    }
    let second: f64 =
        fields.iter().map(|f| vector_norm(f, NormKind::L2).map(|n| n * n)).sum::<Result<f64>>()? / fields.len() as f64;
    let bary = vector_norm(&barycenter(fields)?, NormKind::L2)?;
    Ok(second - bary * bary)
}

/// The same quantity as the empirical variance `(1/m) sum ||u^i - ubar||^2`.
pub fn ensemble_variance(fields: &[&SpectralVector]) -> Result<f64> {
    let bary = barycenter(fields)?;
    let mut acc = 0.0;
    for f in fields {
        acc += vector_norm(&f.sub(&bary)?, NormKind::L2)?.powi(2);
    }
    Ok(acc / fields.len() as f64)
}

/// `int_0^T (<nu_t, |z|^2> - ||barycenter_t||^2) dt` for the empirical measure
/// of an ensemble of paths; nonnegative by Jensen's inequality.
pub fn jensen_gap(paths: &[SolutionPath]) -> Result<f64> {
    if paths.is_empty() {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    }
    for p in paths {
        paths[0].check_compatible(p)?;
    }
    let gaps = par::map_range(paths[0].len(), |i| {
        let slice: Vec<&SpectralVector> = paths.iter().map(|p| &p.states()[i]).collect();
        jensen_gap_fields(&slice)
    });
    let gaps = gaps.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(trapezoid(&gaps, paths[0].dt()))
}

/// `int_0^T chi(t) ||u_t||^2 dt`.
pub fn energy_functional(path: &SolutionPath, chi: impl Fn(f64) -> f64) -> Result<f64> {
    let vals = path
        .times()
        .iter()
        .zip(path.states())
        .map(|(&t, u)| Ok(chi(t) * vector_norm(u, NormKind::L2)?.powi(2)))
        .collect::<Result<Vec<_>>>()?;
    Ok(trapezoid(&vals, path.dt()))
}

/// `int_0^T (||u^n_t||^2 - ||u_t||^2) dt`: the only part of the concentration
/// measure this library represents.
pub fn concentration_defect(approx: &SolutionPath, limit: &SolutionPath) -> Result<f64> {
    approx.check_compatible(limit)?;
    Ok(energy_functional(approx, |_| 1.0)? - energy_functional(limit, |_| 1.0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{diagnostics, run_velocity, RunOptions, SystemSpec};
    use crate::spectral::init::{self, RandomSpectrum};
    use std::f64::consts::PI;

    fn tg_path() -> SolutionPath {
        let g = FourierGrid::new(16).unwrap();
        run_velocity(&SystemSpec::EulerGalerkin { n: 4 }, &init::taylor_green(&g), 1.0, 0.05, RunOptions::default()).unwrap()
    }

    #[test]
    fn energy_pairing_of_taylor_green() {
        let v = young_pairing(&tg_path(), &TestIntegrand::energy()).unwrap();
        assert!((v - 2.0 * PI * PI).abs() < 1e-9, "{v}");
    }

    #[test]
    fn constant_weight_pairs_to_zero() {
        let phi = TestIntegrand::linear(1.0, |_, _| vec![0.3, -0.7]);
        assert!(young_pairing(&tg_path(), &phi).unwrap().abs() < 1e-12);
    }

    #[test]
    fn growth_violation_detected() {
        let cubic = TestIntegrand::new("cubic", 2.0, 1.0, |_, _, z| z[0].powi(3)).unwrap();
        assert!(matches!(cubic.check_admissible(2, &[0.0]), Err(Error::GrowthViolation(_))));
        assert!(young_pairing(&tg_path(), &cubic).is_err());
    }

    #[test]
    fn symmetric_pair_gap() {
        let p = tg_path();
        let neg = SolutionPath::from_states(p.states().iter().map(|u| u.scaled(-1.0)).collect(), p.dt(), None).unwrap();
        let gap = jensen_gap(&[p.clone(), neg]).unwrap();
        let energy = energy_functional(&p, |_| 1.0).unwrap();
        assert!((gap - energy).abs() < 1e-10 * energy);
        assert_eq!(jensen_gap(&[p]).unwrap(), 0.0);
    }

    #[test]
    fn gap_matches_variance() {
        let g = FourierGrid::new(16).unwrap();
        let fields: Vec<SpectralVector> =
            (0..5).map(|s| init::random_velocity(&g, RandomSpectrum { band: 4, ..Default::default() }, s).unwrap()).collect();
        let refs: Vec<&SpectralVector> = fields.iter().collect();
        let a = jensen_gap_fields(&refs).unwrap();
        let b = ensemble_variance(&refs).unwrap();
        assert!((a - b).abs() < 1e-12 * b);
    }

    #[test]
    fn energy_functional_matches_diagnostics() {
        let p = tg_path();
        let d = diagnostics(&p);
        let a = energy_functional(&p, |_| 1.0).unwrap();
        let b = trapezoid(&d.energy, p.dt());
        assert!((a - b).abs() <= 1e-12 * b);
    }
}
