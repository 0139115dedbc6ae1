use gaphilbert::asymptotics::{compare_f, lambda_asymptotic_slope, BoundaryTable};
use gaphilbert::{Lab, RunConfig};

fn lab() -> Lab {
    Lab::build(&RunConfig::default()).unwrap()
}

#[test]
fn root_spacing() {
    let lab = lab();
    let p = lambda_asymptotic_slope(&lab.surface);
    let r = &lab.scan.roots;
    assert!(r.windows(2).all(|w| w[1] > w[0]));
    // consecutive spacing stays within [0.5, 1.5] P after the first roots
    for n in 3..r.len() - 1 {
        let q = (r[n + 1] - r[n]) / p;
        assert!((0.5..=1.5).contains(&q), "spacing ratio {q} at n = {n}");
    }
    // on the symmetric geometry single spacings alternate; their two-step mean is P
    for n in 5..r.len() - 2 {
        let q = (r[n + 2] - r[n]) / (2.0 * p);
        assert!((q - 1.0).abs() < 0.05, "two-step spacing ratio {q} at n = {n}");
    }
}

#[test]
fn scan_minima_are_deep() {
    let lab = lab();
    let scan = &lab.scan;
    for w in scan.roots.windows(2).zip(scan.root_values.windows(2)) {
        let ((a, b), (va, vb)) = ((w.0[0], w.0[1]), (w.1[0], w.1[1]));
        let between = scan
            .kappa
            .iter()
            .zip(&scan.values)
            .filter(|(k, _)| **k > a && **k < b)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max);
        assert!(between >= 1e3 * va.max(vb), "between {a} and {b}: {between} vs {va} {vb}");
    }
    let lt = scan.lambda_tilde();
    assert!(lt.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn singular_system_structure() {
    let lab = lab();
    let sp = &lab.spectrum;
    assert!(sp.orthonormality_defect(11) < 1e-8);
    assert!(sp.pair_defect < 1e-10);
    let top = sp.resolved_count();
    assert!(top >= 12);
    assert!(sp.lambda[..top].windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn asymptotic_model_trends() {
    let lab = lab();
    let sp = &lab.spectrum;
    let table = BoundaryTable::new(&lab.surface, &sp.grid.xi).unwrap();
    let top = sp.resolved_count() - 1;
    let cmp = |n: usize| {
        let t = lab.asymptotics.triple(n, lab.scan.roots[n]);
        compare_f(sp, &lab.asymptotics, &t, &table)
    };
    let gaps: Vec<f64> = [5, 10, top].iter().map(|&n| cmp(n).l2_gap).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");

    // endpoint envelope |f̃_n(x)| ≤ η |x - a_k|^{-1/4} with one η for all n
    let a = lab.geometry().endpoints().to_vec();
    let eta: Vec<f64> = (2..=top)
        .map(|n| {
            let t = lab.asymptotics.triple(n, lab.scan.roots[n]);
            let f = lab.asymptotics.f_tilde(&t, &table);
            table
                .x
                .iter()
                .zip(&f)
                .map(|(x, v)| {
                    let d = a.iter().map(|ak| (x - ak).abs()).fold(f64::INFINITY, f64::min);
                    v.abs() * d.powf(0.25)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let hi = eta.iter().cloned().fold(0.0, f64::max);
    let lo = eta.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(hi / lo < 2.0, "envelope constants {eta:?}");
}

#[test]
fn kappa_error_scales_like_inverse_sqrt() {
    let lab = lab();
    let sp = &lab.spectrum;
    let r = &lab.scan.roots;
    let c: Vec<f64> = (3..=12).map(|n| (sp.kappa(n) - r[n]).abs() * r[n].sqrt()).collect();
    // c_n = |κ_n - κ̃_n| sqrt(κ̃_n) stays within 1.5 times its first value and ends lower
    assert!(c.iter().all(|v| *v <= 1.5 * c[0]), "{c:?}");
    assert!(c[c.len() - 1] < c[0]);
}
