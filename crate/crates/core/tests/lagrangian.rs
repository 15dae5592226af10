use std::f64::consts::PI;
use std::sync::Arc;

use eulerlab::dynamics::{run_velocity, FrozenVelocity, RunOptions, SystemSpec, VelocitySource};
use eulerlab::lagrangian::*;
use eulerlab::spectral::init::{self, RandomSpectrum};
use eulerlab::spectral::*;

fn opts(dt: f64, record_every: usize) -> FlowOptions {
    FlowOptions { dt, record_every }
}

#[test]
fn shear_flow_is_the_analytic_map() {
    let g = FourierGrid::new(16).unwrap();
    let src = FrozenVelocity::new(init::shear(&g));
    let seeds = seed_grid(24);
    let f = integrate_flow(&src, &seeds, 1.5, opts(0.05, 3), Direction::Forward).unwrap();
    for (t, pos) in f.times().iter().zip(f.positions()) {
        for (x, s) in pos.iter().zip(&seeds) {
            assert!((x[0] - (s[0] + t * s[1].sin())).abs() < 1e-10);
            assert!((x[1] - s[1]).abs() < 1e-12);
        }
    }
    for x in f.wrapped_final() {
        assert!((0.0..2.0 * PI).contains(&x[0]) && (0.0..2.0 * PI).contains(&x[1]));
    }
}

#[test]
fn taylor_green_inverse_and_stream_function() {
    let g = FourierGrid::new(16).unwrap();
    let src = FrozenVelocity::new(init::taylor_green(&g));
    let (flow, q) = certify(&src, 64, 1.0, opts(5e-3, 20), VolumeOptions::default()).unwrap();
    assert!(q.inverse_residual <= 1e-8, "{}", q.inverse_residual);
    assert!((q.compressibility - 1.0).abs() <= 8.0 / 64.0);
    let psi = |x: [f64; 2]| -x[0].sin() * x[1].sin();
    for pos in flow.positions() {
        for (x, s) in pos.iter().zip(flow.seeds()) {
            assert!((psi(*x) - psi(*s)).abs() <= 1e-6);
        }
    }
}

#[test]
fn taylor_green_pushforward_conserves_norms() {
    let g = FourierGrid::new(48).unwrap();
    let src = FrozenVelocity::new(init::taylor_green(&g));
    let back = integrate_flow(&src, &seed_grid(48), 1.0, opts(1e-2, 10), Direction::Backward).unwrap();
    let rho0 = PhysicalScalar::from_fn(&g, |x1, x2| (x1 + x2).cos()).to_spectral();
    let path = pushforward(&rho0, &back).unwrap();
    // the pushforward is sampled pointwise, so quadrature norms are the conserved ones
    let quad = |s: &SpectralScalar, p: i32| -> f64 {
        s.to_physical().unwrap().samples().iter().map(|v| v.abs().powi(p)).sum::<f64>() * g.cell_area()
    };
    let (l1, l2, l4) = (quad(&rho0, 1), quad(&rho0, 2), quad(&rho0, 4));
    for s in path.states() {
        assert!(((quad(s, 2) - l2) / l2).abs() < 1e-8);
        assert!(((quad(s, 4) - l4) / l4).abs() < 1e-8);
        // |rho| has kinks, so its quadrature converges only algebraically
        assert!(((quad(s, 1) - l1) / l1).abs() < 1e-2);
    }
}

#[test]
fn flow_distance_identity_vs_shear() {
    let g = FourierGrid::new(16).unwrap();
    let t = 0.8;
    let zero = FrozenVelocity::new(SpectralVector::zeros(&g));
    let shear = FrozenVelocity::new(init::shear(&g));
    let seeds = seed_grid(32);
    let a = integrate_flow(&zero, &seeds, t, opts(0.01, 10), Direction::Forward).unwrap();
    let b = integrate_flow(&shear, &seeds, t, opts(0.01, 10), Direction::Forward).unwrap();
    let d = flow_distance(&a, &b).unwrap();
    // (int T^2 sin^2 x2 dx)^{1/2} = T pi sqrt 2
    assert!((d - t * PI * 2f64.sqrt()).abs() < 1e-10, "{d}");
}

#[test]
fn gronwall_bound_holds_for_nearby_fields() {
    let g = FourierGrid::new(16).unwrap();
    let n = g.dealias_cutoff();
    let seeds = seed_grid(16);
    for (seed, eps) in [(1u64, 1e-2), (2, 1e-3)] {
        let u0 = galerkin_project(&init::random_velocity(&g, RandomSpectrum { band: 4, ..Default::default() }, seed).unwrap(), n)
            .unwrap();
        let d0 = galerkin_project(&init::random_velocity(&g, RandomSpectrum { band: 4, ..Default::default() }, seed + 100).unwrap(), n)
            .unwrap();
        let v0 = u0.combine(1.0, &d0, eps).unwrap();
        let spec = SystemSpec::EulerGalerkin { n };
        let u: Arc<dyn VelocitySource> = Arc::new(run_velocity(&spec, &u0, 0.3, 0.01, RunOptions::default()).unwrap());
        let v: Arc<dyn VelocitySource> = Arc::new(run_velocity(&spec, &v0, 0.3, 0.01, RunOptions::default()).unwrap());
        let x = integrate_flow(u.as_ref(), &seeds, 0.3, opts(0.01, 1), Direction::Forward).unwrap();
        let y = integrate_flow(v.as_ref(), &seeds, 0.3, opts(0.01, 1), Direction::Forward).unwrap();
        let dist = flow_distance(&x, &y).unwrap();
        let bound = gronwall_bound(u.as_ref(), v.as_ref(), 0.3, 30).unwrap();
        assert!(dist > 0.0 && dist <= bound, "{dist} > {bound}");
    }
}

#[test]
fn renormalized_clamp_and_pushforward_agree() {
    let g = FourierGrid::new(64).unwrap();
    let src = FrozenVelocity::new(init::shear(&g));
    let back = integrate_flow(&src, &seed_grid(64), 1.0, opts(1e-2, 1), Direction::Backward).unwrap();
    let rho0 = PhysicalScalar::from_fn(&g, |x1, _| x1.sin()).to_spectral();
    let path = pushforward(&rho0, &back).unwrap();
    let tanh = Renormalizer::new("tanh", 1.0, f64::tanh).unwrap();
    for beta in [Renormalizer::clamp(1.0), tanh, Renormalizer::zero()] {
        let r = renormalize_check(&path, &beta, &src).unwrap();
        assert!(r <= 1e-6, "{}: {r}", beta.name());
    }
    // a clamp that bites has a kink, so the spatial quadrature is only algebraic
    let r = renormalize_check(&path, &Renormalizer::clamp(0.5), &src).unwrap();
    assert!(r <= 1e-2, "{r}");
}

#[test]
fn forward_flow_cannot_push_forward() {
    let g = FourierGrid::new(16).unwrap();
    let src = FrozenVelocity::new(init::shear(&g));
    let fwd = integrate_flow(&src, &seed_grid(16), 0.1, opts(0.05, 1), Direction::Forward).unwrap();
    let rho0 = PhysicalScalar::from_fn(&g, |x1, _| x1.sin()).to_spectral();
    assert!(pushforward(&rho0, &fwd).is_err());
}
