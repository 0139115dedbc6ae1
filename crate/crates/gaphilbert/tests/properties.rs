use nalgebra::DVector;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::f64::consts::PI;

use gaphilbert::continuation::Phantom;
use gaphilbert::sobolev::bump_hs_norm;
use gaphilbert::{Error, GapGeometry, KappaLine, SurfaceData, ThetaContext};

fn endpoints() -> impl Strategy<Value = Vec<f64>> {
    (
        -5.0..5.0f64,
        prop_oneof![Just(6usize), Just(8usize)],
        prop::collection::vec(0.2..2.0f64, 7),
    )
        .prop_map(|(start, m, steps)| {
            let mut a = vec![start];
            for s in steps.iter().take(m - 1) {
                a.push(a[a.len() - 1] + s);
            }
            a
        })
}

fn reference() -> (SurfaceData, ThetaContext) {
    let s = SurfaceData::reference();
    let c = ThetaContext::from_surface(&s, 1e-14).unwrap();
    (s, c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_positive_inside(a in endpoints(), t in 0.001..0.999f64) {
        let g = GapGeometry::new(&a).unwrap();
        let x = g.first() + t * (g.last() - g.first());
        prop_assert!(g.weight_real(x) > 0.0);
        prop_assert_eq!(g.weight(C64::from(g.first())).norm(), 0.0);
        prop_assert_eq!(g.weight(C64::from(g.last())).norm(), 0.0);
    }

    #[test]
    fn radical_boundary_values_and_symmetry(a in endpoints(), t in 0.01..0.99f64, re in -8.0..8.0f64, im in 0.01..4.0f64) {
        let g = GapGeometry::new(&a).unwrap();
        for cut in (0..=g.genus()).map(|k| g.cut(k)) {
            let x = cut.lo + t * cut.len();
            prop_assert!((g.radical_plus(x) + g.radical_minus(x)).norm() <= 1e-14 * g.radical_plus(x).norm());
        }
        let z = C64::new(re, im);
        prop_assert!((g.radical(z.conj()) - g.radical(z).conj()).norm() <= 1e-13 * g.radical(z).norm().max(1.0));
    }

    #[test]
    fn unordered_endpoints_are_rejected(a in endpoints(), k in 0usize..5) {
        let mut b = a.clone();
        b.swap(k, k + 1);
        match GapGeometry::new(&b) {
            Err(Error::NotIncreasing { i, j, .. }) => {
                prop_assert_eq!(i, k + 1);
                prop_assert_eq!(j, k + 2);
            }
            other => prop_assert!(false, "unexpected {:?}", other),
        }
    }

    #[test]
    fn theta_even_and_quasi_periodic(
        re in prop::collection::vec(-1.0..1.0f64, 2),
        im in prop::collection::vec(-0.5..0.5f64, 2),
        mu in prop::collection::vec(-2i32..=2, 2),
        la in prop::collection::vec(-2i32..=2, 2),
    ) {
        let (s, c) = reference();
        let v = DVector::from_fn(2, |k, _| C64::new(re[k], im[k]));
        let a = c.theta(&v);
        prop_assert!((a - c.theta(&(-v.clone()))).norm() <= 1e-12 * a.norm().max(1.0));
        let mu = DVector::from_fn(2, |k, _| C64::from(mu[k] as f64));
        let la = DVector::from_fn(2, |k, _| C64::from(la[k] as f64));
        let lhs = c.theta(&(&v + &mu + &s.tau * &la));
        let i = C64::new(0.0, 1.0);
        let q = (la.transpose() * &s.tau * &la)[(0, 0)];
        let lin = (la.transpose() * &v)[(0, 0)];
        let rhs = (-2.0 * i * PI * lin - i * PI * q).exp() * a;
        prop_assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm().max(1.0));
    }

    #[test]
    fn line_is_real(kappa in -50.0..50.0f64) {
        let (s, _) = reference();
        let line = KappaLine::new(&s);
        let w = line.w(kappa);
        prop_assert!(w.iter().all(|c| c.im.abs() < 1e-9));
    }

    #[test]
    fn g_and_d_schwarz_symmetric(re in -4.0..4.0f64, im in 0.05..3.0f64) {
        let (s, _) = reference();
        let z = C64::new(re, im);
        let g1 = s.g_function(z).unwrap();
        let g2 = s.g_function(z.conj()).unwrap();
        prop_assert!((g1.conj() - g2).norm() < 1e-10);
        let d1 = s.d_function(z).unwrap();
        let d2 = s.d_function(z.conj()).unwrap();
        prop_assert!((d1.conj() - d2).norm() < 1e-10);
    }

    #[test]
    fn phantom_transform_is_linear(p in prop::collection::vec(-2.0..2.0f64, 3), q in prop::collection::vec(-2.0..2.0f64, 3), x in -2.9..2.9f64) {
        let g = GapGeometry::reference();
        let sum: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a + b).collect();
        let lhs = Phantom::new(&g, sum).phi(x);
        let rhs = Phantom::new(&g, p).phi(x) + Phantom::new(&g, q).phi(x);
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn bump_norm_monotone_in_order(width in 0.02..0.5f64) {
        let n0 = bump_hs_norm(width, 0);
        let n1 = bump_hs_norm(width, 1);
        let n2 = bump_hs_norm(width, 2);
        prop_assert!(n0 < n1 && n1 < n2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Periods depend only on the conformal class: τ is unchanged by x -> αx + β, α > 0.
    #[test]
    fn tau_invariant_under_affine_maps(alpha in 0.3..4.0f64, beta in -3.0..3.0f64) {
        let s = SurfaceData::reference();
        let a: Vec<f64> = s.geometry().endpoints().iter().map(|x| alpha * x + beta).collect();
        let t = SurfaceData::build(&GapGeometry::new(&a).unwrap(), 64).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((s.tau[(i, j)] - t.tau[(i, j)]).norm() < 1e-10);
            }
            prop_assert!((s.u_inf[i] - t.u_inf[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn period_matrix_structure_on_random_geometries(a in endpoints()) {
        let s = SurfaceData::build(&GapGeometry::new(&a).unwrap(), 64).unwrap();
        prop_assert!(s.tau_symmetry_defect() < 1e-10);
        prop_assert!(s.tau_real_part_max() < 1e-10);
        prop_assert!(s.im_tau_min_eigenvalue() > 0.0);
    }
}
