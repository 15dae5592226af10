use std::f64::consts::E;

use crate::dynamics::SolutionPath;
use crate::error::{Error, Result};
use crate::spectral::{curl2d, scalar_norm_with, vector_norm, vector_norm_with, NormKind, NormOptions, SpectralVector};

const OVERSAMPLE: NormOptions = NormOptions { oversample: true };

/// Parameters of the growth bound and of the residual radii built from it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundParams {
    /// The unspecified constant in the exponent; calibrate it, it is not known.
    pub c: f64,
    /// Sobolev index of the data norm.
    pub s: f64,
    /// Horizon.
    pub t: f64,
    /// Radius index.
    pub k: u32,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self { c: 1.0, s: 3.0, t: 1.0, k: 1 }
    }
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter(format!("C = {} must be positive", self.c)));
        }
        if !(self.s > 2.0) {
            return Err(Error::InvalidParameter(format!("s = {} must exceed 2", self.s)));
        }
        if !(self.t > 0.0) {
            return Err(Error::InvalidParameter(format!("T = {} must be positive", self.t)));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        Ok(())
    }
}

/// The data entering the growth bound: `||omega_0||_inf` and `||u_0||_{H^s}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthData {
    pub vorticity_sup: f64,
    pub hs_norm: f64,
}

impl GrowthData {
    pub fn of(u0: &SpectralVector, s: f64) -> Result<Self> {
        Ok(Self {
            vorticity_sup: scalar_norm_with(&curl2d(u0), NormKind::Sup, OVERSAMPLE)?,
            hs_norm: vector_norm(u0, NormKind::Hs(s))?,
        })
    }

    /// `r(t) = exp(C (1 + w)(1 + t)) log(e + h / w)`; zero when `w = 0`.
    pub fn rate(&self, c: f64, t: f64) -> f64 {
        let w = self.vorticity_sup;
        if w == 0.0 {
            return 0.0;
        }
        (c * (1.0 + w) * (1.0 + t)).exp() * self.log_factor()
    }

    /// `log r(t)`, finite where `rate` overflows.
    pub fn log_rate(&self, c: f64, t: f64) -> f64 {
        if self.vorticity_sup == 0.0 {
            return f64::NEG_INFINITY;
        }
        c * (1.0 + self.vorticity_sup) * (1.0 + t) + self.log_factor().ln()
    }

    fn log_factor(&self) -> f64 {
        (E + self.hs_norm / self.vorticity_sup).ln()
    }

    /// Smallest `C` for which `rate(C, t) >= g`; may be negative or zero when
    /// any positive constant works.
    pub fn required_constant(&self, t: f64, g: f64) -> f64 {
        if self.vorticity_sup == 0.0 {
            return if g > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        (g / self.log_factor()).ln() / ((1.0 + self.vorticity_sup) * (1.0 + t))
    }
}

/// Growth bound on `||grad u_t||_inf` for data `u0`. Returns 0 for the zero
/// field, where the bound is vacuous.
pub fn growth_bound(u0: &SpectralVector, t: f64, params: &BoundParams) -> Result<f64> {
    params.validate()?;
    let data = GrowthData::of(u0, params.s)?;
    if data.vorticity_sup == 0.0 {
        log::warn!("growth bound requested for a field with zero vorticity");
    }
    Ok(data.rate(params.c, t))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RadiusVariant {
    /// `(1/k) exp(-T r(T))`.
    #[default]
    Single,
    /// `(1/k) exp(-2 T r(T))`.
    Doubled,
}

impl RadiusVariant {
    fn factor(self) -> f64 {
        match self {
            RadiusVariant::Single => 1.0,
            RadiusVariant::Doubled => 2.0,
        }
    }
}

/// Radius and its natural log for a given rate `r(T)`. The radius itself
/// underflows to zero for moderately large rates; the log does not.
pub fn radius_from_rate(rate: f64, t: f64, k: u32, variant: RadiusVariant) -> (f64, f64) {
    let log = -(k as f64).ln() - variant.factor() * t * rate;
    (log.exp(), log)
}

/// Residual radius `(radius, log radius)` around a band-limited field `phi`.
pub fn residual_radius(phi: &SpectralVector, params: &BoundParams, variant: RadiusVariant) -> Result<(f64, f64)> {
    params.validate()?;
    if vector_norm(phi, NormKind::L2)? == 0.0 {
        return Err(Error::InvalidInitialData("residual radius of the zero field".into()));
    }
    let data = GrowthData::of(phi, params.s)?;
    Ok(radius_from_rate(data.rate(params.c, params.t), params.t, params.k, variant))
}

/// Measured gradient growth along one run, for calibration and checking.
#[derive(Clone, Debug)]
pub struct GrowthSample {
    pub data: GrowthData,
    pub times: Vec<f64>,
    /// `||grad u_t||_inf` (Frobenius, oversampled) at each time.
    pub grad_sup: Vec<f64>,
}

impl GrowthSample {
    pub fn measure(path: &SolutionPath, s: f64) -> Result<Self> {
        let data = GrowthData::of(&path.states()[0], s)?;
        let grad_sup = crate::par::map_slice(path.states(), |u| {
            vector_norm_with(u, NormKind::GradSup, OVERSAMPLE).expect("grad sup is valid for vectors")
        });
        Ok(Self { data, times: path.times().to_vec(), grad_sup })
    }

    /// Smallest constant making the bound hold at every recorded time.
    pub fn required_constant(&self) -> f64 {
        self.times
            .iter()
            .zip(&self.grad_sup)
            .map(|(&t, &g)| self.data.required_constant(t, g))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max_t ||grad u_t||_inf / r(t)`; at most one iff the bound holds.
    pub fn worst_ratio(&self, c: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.grad_sup)
            .map(|(&t, &g)| (g.ln() - self.data.log_rate(c, t)).exp())
            .fold(0.0, f64::max)
    }
}

/// Smallest positive `C` for which every training sample satisfies the bound.
pub fn calibrate_constant(training: &[GrowthSample]) -> Result<f64> {
    if training.is_empty() {
        return Err(Error::InvalidParameter("calibration needs at least one run".into()));
    }
    let c = training.iter().map(GrowthSample::required_constant).fold(f64::NEG_INFINITY, f64::max);
    if c == f64::INFINITY {
        return Err(Error::InvalidInitialData("a training run has zero vorticity but growing gradient".into()));
    }
    Ok(c.max(f64::EPSILON))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{init, FourierGrid};
    use std::f64::consts::PI;

    #[test]
    fn taylor_green_rate() {
        let g = FourierGrid::new(32).unwrap();
        let tg = init::taylor_green(&g);
        let r = growth_bound(&tg, 0.0, &BoundParams::default()).unwrap();
        let expected = 3f64.exp() * (E + PI * 54f64.sqrt() / 2.0).ln();
        assert!((r - expected).abs() < 1e-12 * expected);
        let d = GrowthData::of(&tg, 3.0).unwrap();
        assert!((d.log_rate(1.0, 0.7) - d.rate(1.0, 0.7).ln()).abs() < 1e-12);
    }

    #[test]
    fn rate_is_monotone() {
        let d = GrowthData { vorticity_sup: 2.0, hs_norm: 5.0 };
        let d2 = GrowthData { vorticity_sup: 3.0, hs_norm: 5.0 };
        let mut prev = 0.0;
        for i in 0..20 {
            let t = i as f64 * 0.25;
            let r = d.rate(1.0, t);
            assert!(r > prev);
            assert!(d2.rate(1.0, t) > r);
            prev = r;
        }
    }

    #[test]
    fn zero_field() {
        let g = FourierGrid::new(16).unwrap();
        let z = SpectralVector::zeros(&g);
        assert_eq!(growth_bound(&z, 1.0, &BoundParams::default()).unwrap(), 0.0);
        assert!(residual_radius(&z, &BoundParams::default(), RadiusVariant::Single).is_err());
    }

    #[test]
    fn radius_formula() {
        assert_eq!(radius_from_rate(0.0, 1.0, 3, RadiusVariant::Single).0, 1.0 / 3.0);
        let (a, _) = radius_from_rate(0.4, 1.0, 1, RadiusVariant::Single);
        let (b, _) = radius_from_rate(0.4, 1.0, 2, RadiusVariant::Single);
        assert!((a / b - 2.0).abs() < 1e-14);
        let (d, _) = radius_from_rate(0.4, 1.0, 1, RadiusVariant::Doubled);
        assert!((d - a * a).abs() < 1e-15);
    }

    #[test]
    fn taylor_green_radius_two_ways() {
        let g = FourierGrid::new(32).unwrap();
        let tg = init::taylor_green(&g);
        let p = BoundParams { c: 0.1, ..Default::default() };
        let (rad, log) = residual_radius(&tg, &p, RadiusVariant::Single).unwrap();
        // independent evaluation: ||omega||_inf = 2, ||u||_{H^3} = pi sqrt(54)
        let r1 = (0.1f64 * 3.0 * 2.0).exp() * (E + PI * 54f64.sqrt() / 2.0).ln();
        assert!((rad - (-r1).exp()).abs() < 1e-12);
        assert!((log + r1).abs() < 1e-12);
    }

    #[test]
    fn params_validated() {
        for p in [
            BoundParams { c: 0.0, ..Default::default() },
            BoundParams { s: 2.0, ..Default::default() },
            BoundParams { t: 0.0, ..Default::default() },
            BoundParams { k: 0, ..Default::default() },
        ] {
            assert!(p.validate().is_err());
        }
    }
}
