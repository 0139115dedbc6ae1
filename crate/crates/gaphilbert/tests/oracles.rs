//! Independent routes for the surface and theta constants: tanh-sinh
//! quadrature for the periods, a truncated integral for 𝔲(∞), and the
//! classical θ3 value for a diagonal period matrix.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use gaphilbert::geometry::radical_plus_from_offsets;
use gaphilbert::{GapGeometry, SurfaceData, ThetaContext};

fn integrand(x: f64, d: &[f64], j: i32) -> C64 {
    if d.contains(&0.0) {
        return C64::from(0.0);
    }
    C64::from(x.powi(j)) / radical_plus_from_offsets(d)
}

fn de_complex<F: Fn(f64) -> C64>(f: F, lo: f64, hi: f64) -> C64 {
    let re = quadrature::integrate(|t| f(t).re, lo, hi, 1e-14).integral;
    let im = quadrature::integrate(|t| f(t).im, lo, hi, 1e-14).integral;
    C64::new(re, im)
}

/// ∫_lo^hi x^j / R_+(x) dx between two branch points, by double-exponential
/// quadrature after x = end ± t² on each half; the singular offset is t² exactly.
fn de_moment(geom: &GapGeometry, lo: f64, hi: f64, j: i32) -> C64 {
    let a = geom.endpoints();
    let ilo = a.iter().position(|&v| v == lo).unwrap();
    let ihi = a.iter().position(|&v| v == hi).unwrap();
    let h = ((hi - lo) / 2.0).sqrt();
    let left = de_complex(
        |t| {
            let x = lo + t * t;
            let mut d = geom.offsets(x);
            d[ilo] = t * t;
            integrand(x, &d, j) * (2.0 * t)
        },
        0.0,
        h,
    );
    let right = de_complex(
        |t| {
            let x = hi - t * t;
            let mut d = geom.offsets(x);
            d[ihi] = -t * t;
            integrand(x, &d, j) * (2.0 * t)
        },
        0.0,
        h,
    );
    left + right
}

/// ∫_{-X}^{a_1} x^j / R_+(x) dx: t² substitution next to a_1, x = a_1 - e^s beyond.
fn de_left_ray(geom: &GapGeometry, big: f64, j: i32) -> C64 {
    let a1 = geom.first();
    let near = de_complex(
        |t| {
            let x = a1 - t * t;
            let mut d = geom.offsets(x);
            d[0] = -t * t;
            integrand(x, &d, j) * (2.0 * t)
        },
        0.0,
        1.0,
    );
    let far = de_complex(
        |s| {
            let x = a1 - s.exp();
            integrand(x, &geom.offsets(x), j) * s.exp()
        },
        0.0,
        (big + a1).ln(),
    );
    near + far
}

#[test]
fn a_matrix_matches_tanh_sinh() {
    for ends in [
        vec![-3.0, -2.0, -1.0, 1.0, 2.0, 3.0],
        vec![-3.0, -2.2, -0.9, 1.1, 1.7, 3.2],
        vec![0.0, 0.5, 1.0, 2.0, 2.5, 4.0, 5.0, 6.5],
    ] {
        let geom = GapGeometry::new(&ends).unwrap();
        let s = SurfaceData::build(&geom, 64).unwrap();
        let g = geom.genus();
        let scale = s.a.amax();
        for k in 0..g {
            for j in 0..g {
                let v = if k + 1 < g {
                    let gap = geom.gap(k);
                    2.0 * de_moment(&geom, gap.lo, gap.hi, j as i32)
                } else {
                    geom.segments()
                        .iter()
                        .map(|seg| 2.0 * de_moment(&geom, seg.lo, seg.hi, j as i32))
                        .sum()
                };
                assert!(v.im.abs() < 1e-8 * scale, "A[{k},{j}] not real: {v}");
                assert!(
                    (v.re - s.a[(k, j)]).abs() < 1e-8 * scale,
                    "A[{k},{j}]: {} vs {}",
                    v.re,
                    s.a[(k, j)]
                );
            }
        }
    }
}

#[test]
fn u_infinity_from_truncated_integral() {
    let s = SurfaceData::reference();
    let geom = s.geometry().clone();
    let g = geom.genus();
    let big = 1e8;
    // ∫_{a1}^{-∞} = -(∫_{-X}^{a1} + ∫_{-∞}^{-X}); on (-∞, a1) R_+ = (-1)^{g+1} |R|,
    // and the tail is approximated by its leading term x^j / x^{g+1}.
    let sign = if (g + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    let m: Vec<f64> = (0..g)
        .map(|j| {
            let head = de_left_ray(&geom, big, j as i32).re;
            let p = j as i32 - g as i32 - 1;
            // ∫_{-∞}^{-X} x^p / |x|^{...} with |R| ≈ |x|^{g+1}
            let tail = sign * (-1.0f64).powi(j as i32) * big.powi(p + 1) / (-(p + 1)) as f64;
            -(head + tail)
        })
        .collect();
    for i in 0..g {
        let v: f64 = (0..g).map(|j| m[j] * s.a_inv[(j, i)]).sum();
        assert!(
            (v - s.u_inf[i]).abs() < 1e-10,
            "u_inf[{i}]: truncated {v} vs {}",
            s.u_inf[i]
        );
    }
}

#[test]
fn theta_at_zero_for_diagonal_tau() {
    // θ3(0 | i) = π^{1/4} / Γ(3/4), and Θ factorizes for τ = i I.
    let tau = DMatrix::from_diagonal_element(2, 2, C64::new(0.0, 1.0));
    let ctx = ThetaContext::new(&tau, 1e-15).unwrap();
    let z = nalgebra::DVector::from_element(2, C64::from(0.0));
    let t3 = std::f64::consts::PI.powf(0.25) / statrs::function::gamma::gamma(0.75);
    let v = ctx.theta(&z);
    assert!((v - C64::from(t3 * t3)).norm() < 1e-13, "{v} vs {}", t3 * t3);
    assert!((t3 * t3 - 1.18034).abs() < 1e-5);
}

#[test]
fn quadrature_self_convergence() {
    for ends in [
        vec![-3.0, -2.0, -1.0, 1.0, 2.0, 3.0],
        vec![-3.0, -2.2, -0.9, 1.1, 1.7, 3.2],
    ] {
        let geom = GapGeometry::new(&ends).unwrap();
        let a = SurfaceData::build(&geom, 64).unwrap();
        let b = SurfaceData::build(&geom, 128).unwrap();
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-300);
        for k in 0..geom.num_segments() {
            for i in 0..geom.genus() {
                let (x, y) = (a.segment_period(k)[i], b.segment_period(k)[i]);
                if y.norm() > 1e-12 {
                    assert!((x - y).norm() / y.norm() < 1e-10, "segment {k}: {x} vs {y}");
                }
            }
        }
        assert!(rel(a.tau11().im, b.tau11().im) < 1e-10);
        for i in 0..geom.genus() {
            assert!((a.u_inf[i] - b.u_inf[i]).abs() < 1e-10);
            assert!((a.delta[i] - b.delta[i]).abs() < 1e-9);
        }
    }
}
