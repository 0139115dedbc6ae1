//! Sobolev norms of the singular functions, the bump-dictionary lower bound
//! for negative norms, and the instability and weighted stability experiments.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::geometry::GapGeometry;
use crate::quad::{gauss_legendre, gauss_rule};
use crate::spectral::SpectralDecomposition;
use crate::surface::SurfaceData;
use crate::{Error, Result};

/// Highest positive order accepted by [`pos_norm`].
pub const MAX_POSITIVE_ORDER: usize = 4;

/// Gauss order per interior cut for positive norms.
const POS_ORDER: usize = 64;

/// Gauss order on a bump support.
const BUMP_ORDER: usize = 200;

/// The mollifier exp(-1/(1-t²)) on |t| < 1.
pub fn mollifier(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// ‖φ‖_{H^s(ℝ)} for the mollifier scaled to support width `width`, from
/// ∫ (1+ξ²)^s |φ̂(ξ)|² dξ / 2π on a zero-padded FFT grid.
pub fn bump_hs_norm(width: f64, s: usize) -> f64 {
    let n = 1 << 14;
    let period = 16.0 * width;
    let dx = period / n as f64;
    let mut buf: Vec<rustfft::num_complex::Complex<f64>> = (0..n)
        .map(|k| {
            let x = -0.5 * period + k as f64 * dx;
            rustfft::num_complex::Complex::new(mollifier(2.0 * x / width), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mut acc = 0.0;
    for (k, c) in buf.iter().enumerate() {
        let m = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        let xi = 2.0 * std::f64::consts::PI * m / period;
        acc += (1.0 + xi * xi).powi(s as i32) * (c.norm() * dx).powi(2);
    }
    (acc / period).sqrt()
}

/// ‖f‖_{H^{s1}(I_i)} from a derivative jet: `jet(x, s1)` returns f, f', ..., f^{(s1)} at x.
pub fn sobolev_pos_norm<F: Fn(f64, usize) -> Result<Vec<f64>>>(
    geom: &GapGeometry,
    jet: F,
    s1: usize,
) -> Result<f64> {
    if s1 > MAX_POSITIVE_ORDER {
        return Err(Error::InvalidArgument(format!(
            "positive order {s1} exceeds {MAX_POSITIVE_ORDER}"
        )));
    }
    let mut acc = 0.0;
    for cut in geom.interior_cuts() {
        let (xs, ws) = gauss_rule(cut.lo, cut.hi, POS_ORDER);
        for (x, w) in xs.iter().zip(&ws) {
            let d = jet(*x, s1)?;
            acc += w * d.iter().take(s1 + 1).map(|v| v * v).sum::<f64>();
        }
    }
    Ok(acc.sqrt())
}

/// ‖f_n‖_{H^{s1}(I_i)} of the weighted singular function.
pub fn pos_norm(spec: &SpectralDecomposition, n: usize, s1: usize) -> Result<f64> {
    sobolev_pos_norm(spec.geometry(), |x, k| spec.f_weighted_derivs(n, x, k), s1)
}

/// Translates of one bump of width L on admissible subintervals of the gaps.
#[derive(Debug, Clone)]
pub struct BumpDictionary {
    pub width: f64,
    pub centers: Vec<f64>,
    pub s2: usize,
    /// ‖φ‖_{H^{s2}(ℝ)}, shared by all translates.
    pub hs_norm: f64,
    /// min distance of any bump support to I_i.
    pub min_dist_interior: f64,
}

impl BumpDictionary {
    /// Centers on a uniform grid in every gap, keeping the support at least
    /// `omega` from I_e and at least `d` from I_i.
    pub fn admissible(
        geom: &GapGeometry,
        width: f64,
        omega: f64,
        d: f64,
        per_gap: usize,
        s2: usize,
    ) -> Result<Self> {
        let g = geom.genus();
        let mut centers = Vec::new();
        for j in 0..g {
            let gap = geom.gap(j);
            let lo_margin = if j == 0 { omega } else { d };
            let hi_margin = if j + 1 == g { omega } else { d };
            let lo = gap.lo + lo_margin + 0.5 * width;
            let hi = gap.hi - hi_margin - 0.5 * width;
            if hi < lo {
                continue;
            }
            for k in 0..per_gap {
                let t = if per_gap == 1 { 0.5 } else { k as f64 / (per_gap - 1) as f64 };
                centers.push(lo + (hi - lo) * t);
            }
        }
        if centers.is_empty() {
            return Err(Error::InvalidArgument(
                "no admissible bump fits into the gaps".into(),
            ));
        }
        let inner: Vec<(f64, f64)> = geom.interior_cuts().iter().map(|c| (c.lo, c.hi)).collect();
        let min_dist_interior = centers
            .iter()
            .flat_map(|&c| {
                let (blo, bhi) = (c - 0.5 * width, c + 0.5 * width);
                inner
                    .iter()
                    .map(move |&(lo, hi)| if bhi <= lo { lo - bhi } else { blo - hi })
            })
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            width,
            centers,
            s2,
            hs_norm: bump_hs_norm(width, s2),
            min_dist_interior,
        })
    }

    pub fn bump(&self, c: f64, x: f64) -> f64 {
        mollifier(2.0 * (x - c) / self.width)
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NegNormBound {
    pub value: f64,
    pub center: f64,
}

/// sup over the dictionary of |∫ f φ| / ‖φ‖_{H^{s2}}, a lower bound for
/// ‖f‖_{H^{-s2}(J)}. `f` maps a batch of points to values.
pub fn sobolev_neg_norm_lb<F: Fn(&[f64]) -> Result<Vec<f64>>>(
    dict: &BumpDictionary,
    f: F,
) -> Result<NegNormBound> {
    if dict.is_empty() {
        return Err(Error::InvalidArgument("empty bump dictionary".into()));
    }
    let (t, w) = gauss_legendre(BUMP_ORDER);
    let h = 0.5 * dict.width;
    let mut best = NegNormBound {
        value: -1.0,
        center: f64::NAN,
    };
    for &c in &dict.centers {
        let xs: Vec<f64> = t.iter().map(|ti| c + h * ti).collect();
        let fx = f(&xs)?;
        let ip: f64 = (0..xs.len()).map(|i| h * w[i] * mollifier(t[i]) * fx[i]).sum();
        let v = ip.abs() / dict.hs_norm;
        if v > best.value {
            best = NegNormBound { value: v, center: c };
        }
    }
    Ok(best)
}

/// max Re g on the rectangles at distance `d_gamma` around each interior cut.
/// Re g is symmetric under conjugation, so the upper half suffices.
pub fn gamma_max_re_g(surface: &SurfaceData, d_gamma: f64, per_side: usize) -> Result<f64> {
    let mut m = f64::NEG_INFINITY;
    for cut in surface.geometry().interior_cuts() {
        let (lo, hi) = (cut.lo - d_gamma, cut.hi + d_gamma);
        let mut pts = Vec::new();
        for k in 0..=per_side {
            let t = k as f64 / per_side as f64;
            pts.push(C64::new(lo + (hi - lo) * t, d_gamma));
            pts.push(C64::new(lo, d_gamma * t));
            pts.push(C64::new(hi, d_gamma * t));
        }
        for z in pts {
            m = m.max(surface.g_function(z)?.re);
        }
    }
    Ok(m)
}

/// max over the bumps of min Re g on the bump support.
pub fn bump_best_min_re_g(surface: &SurfaceData, dict: &BumpDictionary) -> Result<(f64, f64)> {
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for &c in &dict.centers {
        let mut lo = f64::INFINITY;
        for k in 0..=20 {
            let x = c - 0.5 * dict.width + dict.width * k as f64 / 20.0;
            lo = lo.min(surface.re_g_real(x)?);
        }
        if lo > best.0 {
            best = (lo, c);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy)]
pub struct InstabilityRow {
    pub n: usize,
    pub kappa: f64,
    pub pos_norm: f64,
    pub neg_norm_lb: f64,
    pub ratio: f64,
    pub center: f64,
}

/// r_n = (H^{-s2}(J) lower bound) / ‖f_n‖_{H^{s1}(I_i)} for each resolved n.
pub fn instability_experiment(
    spec: &SpectralDecomposition,
    dict: &BumpDictionary,
    s1: usize,
    ns: &[usize],
) -> Result<Vec<InstabilityRow>> {
    let usable: Vec<usize> = ns.iter().copied().filter(|&n| spec.is_resolved(n)).collect();
    if usable.is_empty() {
        return Err(Error::BelowNoiseFloor {
            n: ns.iter().copied().min().unwrap_or(0),
        });
    }
    usable
        .par_iter()
        .map(|&n| {
            let p = pos_norm(spec, n, s1)?;
            let neg = sobolev_neg_norm_lb(dict, |xs| spec.f_weighted_real(n, xs))?;
            Ok(InstabilityRow {
                n,
                kappa: spec.kappa(n),
                pos_norm: p,
                neg_norm_lb: neg.value,
                ratio: neg.value / p,
                center: neg.center,
            })
        })
        .collect()
}

/// Least-squares slope of y against x.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy)]
pub struct InstabilityFit {
    /// Slope of ln r_n against κ_n.
    pub slope: f64,
    /// max_bump min Re g - max_γ Re g.
    pub predicted: f64,
    pub bump_min_re_g: f64,
    pub gamma_max_re_g: f64,
    pub rel_err: f64,
    /// r_last / r_first over the fitted rows.
    pub growth: f64,
}

pub fn fit_instability(
    rows: &[InstabilityRow],
    surface: &SurfaceData,
    dict: &BumpDictionary,
    d_gamma: f64,
) -> Result<InstabilityFit> {
    if rows.len() < 2 {
        return Err(Error::InvalidArgument("need at least two rows to fit".into()));
    }
    let x: Vec<f64> = rows.iter().map(|r| r.kappa).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.ratio.ln()).collect();
    let slope = ls_slope(&x, &y);
    let (bmin, _) = bump_best_min_re_g(surface, dict)?;
    let gmax = gamma_max_re_g(surface, d_gamma, 40)?;
    let predicted = bmin - gmax;
    Ok(InstabilityFit {
        slope,
        predicted,
        bump_min_re_g: bmin,
        gamma_max_re_g: gmax,
        rel_err: (slope - predicted).abs() / predicted.abs(),
        growth: rows[rows.len() - 1].ratio / rows[0].ratio,
    })
}

/// The weighted coefficient space 𝒜 with w_n = max(n,1) e^{κ_n (sup_J Re g + 1/2)}.
#[derive(Debug, Clone)]
pub struct WeightSpaceA {
    pub weights: Vec<f64>,
    pub sup_re_g: f64,
    /// J as a union of closed intervals in the gaps.
    pub j: Vec<(f64, f64)>,
}

impl WeightSpaceA {
    /// J = the gaps shrunk by `omega` at both ends.
    pub fn gaps(surface: &SurfaceData, spec: &SpectralDecomposition, omega: f64) -> Result<Self> {
        let geom = surface.geometry();
        let j: Vec<(f64, f64)> = (0..geom.genus())
            .map(|k| (geom.gap(k).lo + omega, geom.gap(k).hi - omega))
            .collect();
        let mut sup = f64::NEG_INFINITY;
        for &(lo, hi) in &j {
            for k in 0..=200 {
                sup = sup.max(surface.re_g_real(lo + (hi - lo) * k as f64 / 200.0)?);
            }
        }
        let weights = (0..spec.resolved_count())
            .map(|n| (n.max(1) as f64) * (spec.kappa(n) * (sup + 0.5)).exp())
            .collect();
        Ok(Self {
            weights,
            sup_re_g: sup,
            j,
        })
    }

    pub fn measure(&self) -> f64 {
        self.j.iter().map(|(lo, hi)| hi - lo).sum()
    }

    /// Σ w_n² ψ_n².
    pub fn norm_sq(&self, psi: &[f64]) -> f64 {
        psi.iter().zip(&self.weights).map(|(p, w)| (p * w).powi(2)).sum()
    }

    /// Quadrature nodes and weights on J.
    pub fn rule(&self, order: usize) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::new();
        let mut ws = Vec::new();
        for &(lo, hi) in &self.j {
            let (x, w) = gauss_rule(lo, hi, order);
            xs.extend(x);
            ws.extend(w);
        }
        (xs, ws)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StabilityRow {
    pub n_max: usize,
    pub empirical_c: f64,
    /// Exact norm of the truncated continuation operator 𝒜 → L²(J).
    pub operator_norm: f64,
    pub analytic_c: f64,
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    /// max_J |f_n| e^{-κ_n (sup_J Re g + 1/2)} per n.
    pub envelope: Vec<f64>,
    pub c_j: f64,
}

/// Sup of ‖Σ_{n ≤ n_max} ψ_n f_n‖_{L²(J)} over random points ψ of the unit
/// sphere of 𝒜 (drawn once over all resolved n), for n_max = `n_from`..=last
/// resolved, against c_J sqrt(|J| Σ 1/max(n,1)²).
pub fn stability_experiment(
    spec: &SpectralDecomposition,
    space: &WeightSpaceA,
    samples: usize,
    seed: u64,
    n_from: usize,
) -> Result<StabilityReport> {
    let top = space.weights.len();
    if top == 0 || n_from >= top {
        return Err(Error::BelowNoiseFloor { n: n_from });
    }
    let (xs, ws) = space.rule(48);
    let fvals: Vec<Vec<f64>> = (0..top)
        .into_par_iter()
        .map(|n| spec.f_weighted_real(n, &xs))
        .collect::<Result<_>>()?;
    let envelope: Vec<f64> = (0..top)
        .map(|n| {
            let m = fvals[n].iter().fold(0.0_f64, |a, b| a.max(b.abs()));
            m * (-spec.kappa(n) * (space.sup_re_g + 0.5)).exp()
        })
        .collect();
    let c_j = envelope.iter().cloned().fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Vec<f64>> = (0..samples)
        .map(|_| (0..top).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let mut rows = Vec::new();
    for n_max in n_from..top {
        let mut emp: f64 = 0.0;
        for z in &draws {
            let zn = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            let psi: Vec<f64> = (0..=n_max).map(|n| z[n] / zn / space.weights[n]).collect();
            let l2: f64 = (0..xs.len())
                .map(|i| {
                    let v: f64 = (0..=n_max).map(|n| psi[n] * fvals[n][i]).sum();
                    ws[i] * v * v
                })
                .sum();
            emp = emp.max(l2.sqrt());
        }
        let m = DMatrix::from_fn(xs.len(), n_max + 1, |i, n| {
            ws[i].sqrt() * fvals[n][i] / space.weights[n]
        });
        let operator_norm = m.singular_values().max();
        let s: f64 = (0..=n_max).map(|n| 1.0 / (n.max(1) as f64).powi(2)).sum();
        rows.push(StabilityRow {
            n_max,
            empirical_c: emp,
            operator_norm,
            analytic_c: c_j * (space.measure() * s).sqrt(),
        });
    }
    Ok(StabilityReport { rows, envelope, c_j })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_h1(width: f64) -> (f64, f64) {
        // ∫φ² and ∫φ'² with the analytic derivative
        let (t, w) = gauss_legendre(400);
        let h = 0.5 * width;
        let mut a = 0.0;
        let mut b = 0.0;
        for i in 0..t.len() {
            let p = mollifier(t[i]);
            let dp = p * (-2.0 * t[i] / (1.0 - t[i] * t[i]).powi(2)) / h;
            a += h * w[i] * p * p;
            b += h * w[i] * dp * dp;
        }
        (a, b)
    }

    #[test]
    fn fft_norms_match_direct_quadrature() {
        let (a, b) = direct_h1(0.1);
        assert!((bump_hs_norm(0.1, 0) - a.sqrt()).abs() < 1e-10 * a.sqrt());
        assert!((bump_hs_norm(0.1, 1) - (a + b).sqrt()).abs() < 1e-8 * (a + b).sqrt());
        assert!(bump_hs_norm(0.1, 2) > bump_hs_norm(0.1, 1));
    }

    #[test]
    fn pos_norm_of_closed_forms() {
        let geom = GapGeometry::reference();
        // f ≡ 1 on I_i = [-1, 1]
        for s1 in 0..3 {
            let v = sobolev_pos_norm(
                &geom,
                |_, k| Ok((0..=k).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect()),
                s1,
            )
            .unwrap();
            assert!((v * v - 2.0).abs() < 1e-13);
        }
        // f = sin: ∫_{-1}^{1} sin² + cos² = 2, ∫ sin² = 1 - sin(2)/2
        let jet = |x: f64, k: usize| Ok((0..=k).map(|j| (x + j as f64 * std::f64::consts::FRAC_PI_2).sin()).collect());
        let l2 = sobolev_pos_norm(&geom, jet, 0).unwrap();
        assert!((l2 * l2 - (1.0 - (2.0f64).sin() / 2.0)).abs() < 1e-8);
        let h1 = sobolev_pos_norm(&geom, jet, 1).unwrap();
        assert!((h1 * h1 - 2.0).abs() < 1e-8);
        assert!(sobolev_pos_norm(&geom, jet, 2).unwrap() >= h1);
        assert!(sobolev_pos_norm(&geom, jet, 5).is_err());
    }

    #[test]
    fn self_pairing_gives_l2_norm() {
        let geom = GapGeometry::reference();
        let dict = BumpDictionary::admissible(&geom, 0.1, 0.05, 0.1, 1, 0).unwrap();
        let c = dict.centers[0];
        let b = sobolev_neg_norm_lb(&dict, |xs| Ok(xs.iter().map(|&x| dict.bump(c, x)).collect())).unwrap();
        assert!((b.value - dict.hs_norm).abs() < 1e-8 * dict.hs_norm);
        let d1 = BumpDictionary::admissible(&geom, 0.1, 0.05, 0.1, 1, 1).unwrap();
        let b1 = sobolev_neg_norm_lb(&d1, |xs| Ok(xs.iter().map(|&x| dict.bump(c, x)).collect())).unwrap();
        assert!(b1.value <= b.value);
    }

    #[test]
    fn sign_definite_bound() {
        let geom = GapGeometry::reference();
        let dict = BumpDictionary::admissible(&geom, 0.1, 0.05, 0.1, 5, 1).unwrap();
        let f = |x: f64| 2.0 + x.sin();
        let b = sobolev_neg_norm_lb(&dict, |xs| Ok(xs.iter().map(|&x| f(x)).collect())).unwrap();
        let (t, w) = gauss_legendre(200);
        let int_phi: f64 = t.iter().zip(&w).map(|(t, w)| 0.05 * w * mollifier(*t)).sum();
        // min |f| ≥ 1 everywhere
        assert!(b.value >= int_phi / dict.hs_norm);
    }

    #[test]
    fn dictionary_respects_margins() {
        let geom = GapGeometry::reference();
        let dict = BumpDictionary::admissible(&geom, 0.1, 0.05, 0.1, 40, 1).unwrap();
        assert_eq!(dict.len(), 80);
        assert!(dict.min_dist_interior >= 0.1 - 1e-12);
        let empty = BumpDictionary::admissible(&geom, 0.95, 0.05, 0.1, 4, 1);
        assert!(empty.is_err());
    }
}
