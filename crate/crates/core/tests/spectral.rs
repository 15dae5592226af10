use std::f64::consts::PI;
use std::sync::Arc;

use eulerlab::spectral::init::{self, RandomSpectrum};
use eulerlab::spectral::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn random_scalar(g: &Arc<FourierGrid>, seed: u64) -> SpectralScalar {
    init::random_vorticity(g, RandomSpectrum { band: g.dealias_cutoff(), slope: 1.0, l2_norm: 1.0 }, seed).unwrap()
}

fn random_vector(g: &Arc<FourierGrid>, band: usize, seed: u64) -> SpectralVector {
    init::random_velocity(g, RandomSpectrum { band, slope: 1.0, l2_norm: 2.0 * PI }, seed).unwrap()
}

#[test]
fn forward_transform_matches_direct_dft() {
    for n in [8usize, 16, 32, 64] {
        let g = FourierGrid::new(n).unwrap();
        let f = PhysicalScalar::from_fn(&g, |x1, x2| (x1 + 0.3).sin() * (2.0 * x2).cos() + (x1 - x2).cos().exp());
        let hat = f.to_spectral();
        let pts = g.points();
        // sampled modes only at the larger sizes: the direct sum is O(N^4)
        let step = if n >= 32 { 7 } else { 1 };
        for idx in (0..g.len()).step_by(step) {
            let (k1, k2) = g.wavevector(idx);
            let mut direct = Complex64::new(0.0, 0.0);
            for (p, x) in pts.iter().enumerate() {
                let ph = -(k1 as f64 * x[0] + k2 as f64 * x[1]);
                direct += f.samples()[p] * Complex64::new(ph.cos(), ph.sin());
            }
            direct /= (n * n) as f64;
            assert!((hat.coeffs()[idx] - direct).norm() < 1e-12, "N={n} k=({k1},{k2})");
        }
        let back = hat.to_physical().unwrap();
        for (a, b) in back.samples().iter().zip(f.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn taylor_green_norms() {
    let g = FourierGrid::new(32).unwrap();
    let tg = init::taylor_green(&g);
    assert!((vector_norm(&tg, NormKind::L2).unwrap() - PI * 2f64.sqrt()).abs() < 1e-12);
    let h3 = 3f64.powf(1.5) * PI * 2f64.sqrt();
    assert!((vector_norm(&tg, NormKind::Hs(3.0)).unwrap() - h3).abs() < 1e-10);
    let w = curl2d(&tg);
    assert!((scalar_norm(&w, NormKind::Sup).unwrap() - 2.0).abs() < 1e-12);
    let gs = vector_norm_with(&tg, NormKind::GradSup, NormOptions { oversample: true }).unwrap();
    assert!((gs - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn grad_sup_converges_under_refinement() {
    let g = FourierGrid::new(32).unwrap();
    let u = random_vector(&g, 6, 9);
    let fine = FourierGrid::new(64).unwrap();
    let a = vector_norm_with(&u, NormKind::GradSup, NormOptions { oversample: true }).unwrap();
    let b = vector_norm_with(&u.resample(&fine), NormKind::GradSup, NormOptions { oversample: true }).unwrap();
    assert!((a - b).abs() <= 1e-2 * b, "{a} vs {b}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn biot_savart_inverts_curl(seed in any::<u64>(), n in prop::sample::select(vec![8usize, 16, 32])) {
        let g = FourierGrid::new(n).unwrap();
        let w = random_scalar(&g, seed);
        let u = biot_savart(&w).unwrap();
        prop_assert!(u.is_divergence_free());
        let back = curl2d(&u);
        let err = scalar_norm(&back.sub(&w).unwrap(), NormKind::L2).unwrap();
        prop_assert!(err <= 1e-12 * scalar_norm(&w, NormKind::L2).unwrap().max(1.0));
    }

    #[test]
    fn leray_is_an_orthogonal_projection(s1 in any::<u64>(), s2 in any::<u64>()) {
        let g = FourierGrid::new(16).unwrap();
        let v = SpectralVector::new(random_scalar(&g, s1), random_scalar(&g, s1 ^ 0xabcdef)).unwrap();
        let w = SpectralVector::new(random_scalar(&g, s2), random_scalar(&g, s2 ^ 0x123456)).unwrap();
        let pv = leray_project(&v);
        prop_assert!(pv.is_divergence_free());
        let ppv = leray_project(&pv);
        prop_assert!(vector_norm(&ppv.sub(&pv).unwrap(), NormKind::L2).unwrap() <= 1e-13);
        let lhs = pv.inner(&w).unwrap();
        let rhs = v.inner(&leray_project(&w)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn parseval(seed in any::<u64>(), n in prop::sample::select(vec![8usize, 16, 32])) {
        let g = FourierGrid::new(n).unwrap();
        let f = random_scalar(&g, seed);
        let phys = f.to_physical().unwrap();
        let quad: f64 = phys.samples().iter().map(|x| x * x).sum::<f64>() * g.cell_area();
        let spec = scalar_norm(&f, NormKind::L2).unwrap().powi(2);
        prop_assert!((quad - spec).abs() <= 1e-12 * spec.max(1e-300));
    }

    #[test]
    fn galerkin_commutes_with_derivatives(seed in any::<u64>(), cut in 1usize..10) {
        let g = FourierGrid::new(32).unwrap();
        let u = random_vector(&g, 10, seed);
        let pu = galerkin_project(&u, cut).unwrap();
        for axis in [Axis::X1, Axis::X2] {
            let a = differentiate(pu.component(0), axis);
            let b = galerkin_project(&SpectralVector::new(differentiate(u.component(0), axis), differentiate(u.component(1), axis)).unwrap(), cut).unwrap();
            prop_assert!(scalar_norm(&a.sub(b.component(0)).unwrap(), NormKind::L2).unwrap() <= 1e-13);
        }
        let twice = galerkin_project(&pu, cut).unwrap();
        prop_assert!(vector_norm(&twice.sub(&pu).unwrap(), NormKind::L2).unwrap() == 0.0);
    }

    #[test]
    fn off_grid_evaluation_agrees_at_collocation_points(seed in any::<u64>()) {
        let g = FourierGrid::new(16).unwrap();
        let u = random_vector(&g, 5, seed);
        let [u1, u2] = u.to_physical().unwrap();
        let pts = g.points();
        for (i, v) in eval_velocity(&u, &pts).iter().enumerate() {
            prop_assert!((v[0] - u1.samples()[i]).abs() < 1e-12);
            prop_assert!((v[1] - u2.samples()[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn snapshot_round_trip() {
    let g = FourierGrid::new(16).unwrap();
    let u = random_vector(&g, 5, 3);
    let snap = snapshot::Snapshot::velocity(0.25, &u).unwrap();
    let mut buf = Vec::new();
    snap.write(&mut buf).unwrap();
    assert_eq!(&buf[..4], b"EGWP");
    let back = snapshot::Snapshot::read(buf.as_slice()).unwrap();
    assert_eq!(back, snap);
}
