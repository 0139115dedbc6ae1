//! Riemann theta function, the real line W(κ) and its intersections with the
//! theta divisor.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::surface::{CVec, SurfaceData};
use crate::{Error, Result};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Largest accepted lattice radius per coordinate.
pub const MAX_RADIUS: usize = 12;

#[derive(Debug, Clone)]
pub struct ThetaContext {
    tau: DMatrix<C64>,
    y_inv: DMatrix<f64>,
    radius: usize,
    target: f64,
    offsets: Vec<Vec<i64>>,
}

fn lattice_box(g: usize, m: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..g {
        let mut next = Vec::with_capacity(out.len() * (2 * m as usize + 1));
        for v in &out {
            for k in -m..=m {
                let mut w = v.clone();
                w.push(k);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

impl ThetaContext {
    /// Radius is the smallest m with exp(-π λ_min(Im τ) m²) < target, plus one
    /// to cover the rounding of the summation center.
    pub fn new(tau: &DMatrix<C64>, target: f64) -> Result<Self> {
        if !(target > 0.0) {
            return Err(Error::InvalidArgument("theta target must be positive".into()));
        }
        let y = tau.map(|z| z.im);
        let lmin = SymmetricEigen::new((&y + y.transpose()) * 0.5)
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if !(lmin > 0.0) {
            return Err(Error::NotPositiveDefinite(lmin));
        }
        let mut m = 1usize;
        while (-PI * lmin * (m * m) as f64).exp() >= target {
            m += 1;
            if m > MAX_RADIUS {
                return Err(Error::ThetaTruncation {
                    radius: MAX_RADIUS,
                    target,
                });
            }
        }
        Self::with_radius(tau, m + 1, target)
    }

    pub fn with_radius(tau: &DMatrix<C64>, radius: usize, target: f64) -> Result<Self> {
        let y = tau.map(|z| z.im);
        let y_inv = y
            .try_inverse()
            .ok_or(Error::NotPositiveDefinite(0.0))?;
        Ok(Self {
            tau: tau.clone(),
            y_inv,
            radius,
            target,
            offsets: lattice_box(tau.nrows(), radius as i64),
        })
    }

    pub fn from_surface(s: &SurfaceData, target: f64) -> Result<Self> {
        Self::new(&s.tau, target)
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn tau(&self) -> &DMatrix<C64> {
        &self.tau
    }

    pub fn genus(&self) -> usize {
        self.tau.nrows()
    }

    // the lattice point closest to the maximum of the Gaussian weight
    fn center(&self, z: &CVec) -> Vec<i64> {
        let im = z.map(|c| c.im);
        let c = -(&self.y_inv * im);
        c.iter().map(|x| x.round() as i64).collect()
    }

    fn sum(&self, z: &CVec, with_grad: bool) -> (C64, CVec) {
        let g = self.genus();
        let c = self.center(z);
        let mut s = C64::from(0.0);
        let mut gr = CVec::zeros(g);
        let mut n = vec![0.0; g];
        for off in &self.offsets {
            for k in 0..g {
                n[k] = (off[k] + c[k]) as f64;
            }
            let mut q = C64::from(0.0);
            for i in 0..g {
                let mut row = C64::from(0.0);
                for j in 0..g {
                    row += self.tau[(i, j)] * n[j];
                }
                q += n[i] * row;
            }
            let lin: C64 = (0..g).map(|k| n[k] * z[k]).sum();
            let e = (I * PI * q + 2.0 * I * PI * lin).exp();
            s += e;
            if with_grad {
                for k in 0..g {
                    gr[k] += 2.0 * I * PI * n[k] * e;
                }
            }
        }
        (s, gr)
    }

    pub fn theta(&self, z: &CVec) -> C64 {
        self.sum(z, false).0
    }

    pub fn grad(&self, z: &CVec) -> CVec {
        self.sum(z, true).1
    }

    pub fn theta_and_grad(&self, z: &CVec) -> (C64, CVec) {
        self.sum(z, true)
    }
}

/// The real line W(κ) = (κ/iπ) τ_1 + L δ/(2π) + (e_1 + e_g)/2 and the point
/// W_0 = τ_1/2 - (e_1 + e_g)/2.
#[derive(Debug, Clone)]
pub struct KappaLine {
    pub tau1: CVec,
    pub w_const: DVector<f64>,
    pub w0: CVec,
}

impl KappaLine {
    pub fn new(s: &SurfaceData) -> Self {
        let g = s.genus();
        let mut e = DVector::zeros(g);
        e[0] += 0.5;
        e[g - 1] += 0.5;
        let w_const = &s.l * &s.delta / (2.0 * PI) + &e;
        let tau1 = s.tau1();
        let w0 = &tau1 * C64::from(0.5) - e.map(C64::from);
        Self { tau1, w_const, w0 }
    }

    pub fn w(&self, kappa: f64) -> CVec {
        &self.tau1 * (kappa / (I * PI)) + self.w_const.map(C64::from)
    }

    pub fn w0(&self) -> &CVec {
        &self.w0
    }

    /// Argument of Θ along the scan: W(κ) - W_0.
    pub fn divisor_arg(&self, kappa: f64) -> CVec {
        self.w(kappa) - &self.w0
    }

    /// 𝐟 = W(κ) - W_0 + τ_1, the representative with Im 𝐟 = Im W_0.
    pub fn f_vec(&self, kappa: f64) -> CVec {
        self.divisor_arg(kappa) + &self.tau1
    }

    /// π / |Im τ_11|, the asymptotic spacing of the roots.
    pub fn period(&self) -> f64 {
        PI / self.tau1[0].im.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MinimumKind {
    Root,
    Ambiguous,
}

#[derive(Debug, Clone)]
pub struct DivisorScan {
    pub kappa: Vec<f64>,
    pub values: Vec<f64>,
    /// Accepted κ̃_n, increasing.
    pub roots: Vec<f64>,
    /// |Θ| at each accepted root.
    pub root_values: Vec<f64>,
    /// Refined minima that were neither clear roots nor clear non-roots.
    pub ambiguous: Vec<f64>,
    pub period: f64,
}

impl DivisorScan {
    pub fn lambda_tilde(&self) -> Vec<f64> {
        self.roots.iter().map(|k| (-k).exp()).collect()
    }

    /// Grid index of the nearest grid point to each accepted root.
    pub fn is_root_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.kappa.len()];
        if self.kappa.len() < 2 {
            return flags;
        }
        let h = self.kappa[1] - self.kappa[0];
        for r in &self.roots {
            let i = ((r - self.kappa[0]) / h).round() as usize;
            if i < flags.len() {
                flags[i] = true;
            }
        }
        flags
    }

    /// Number of roots in [lo, hi).
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.roots.iter().filter(|&&r| r >= lo && r < hi).count()
    }
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Threshold between an ambiguous minimum and an ordinary one.
pub const AMBIGUOUS_RATIO: f64 = 1e-2;

/// Scan |Θ(W(κ) - W_0)| on a grid and refine its zeros.
pub fn find_kappa_tilde(
    ctx: &ThetaContext,
    line: &KappaLine,
    kappa_min: f64,
    kappa_max: f64,
    step: f64,
    eps_div: f64,
) -> Result<DivisorScan> {
    let period = line.period();
    if !(step > 0.0 && step < 0.1 * period) {
        return Err(Error::InvalidArgument(format!(
            "scan step {step} must lie in (0, {:.4})",
            0.1 * period
        )));
    }
    if !(kappa_max > kappa_min) {
        return Err(Error::InvalidArgument("empty kappa window".into()));
    }
    let n = ((kappa_max - kappa_min) / step).floor() as usize + 1;
    let kappa: Vec<f64> = (0..n).map(|i| kappa_min + i as f64 * step).collect();
    let f = |k: f64| ctx.theta(&line.divisor_arg(k)).norm();
    let values: Vec<f64> = kappa.par_iter().map(|&k| f(k)).collect();

    let half = ((0.5 * period) / step).ceil() as usize;
    let cands: Vec<usize> = (1..n - 1)
        .filter(|&i| values[i] <= values[i - 1] && values[i] < values[i + 1])
        .collect();
    let refined: Vec<(f64, f64, f64)> = cands
        .par_iter()
        .map(|&i| {
            let (x, fx) = golden_min(f, kappa[i - 1], kappa[i + 1], 1e-10);
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            let mut win: Vec<f64> = values[lo..hi].to_vec();
            (x, fx, median(&mut win))
        })
        .collect();

    let mut roots = Vec::new();
    let mut root_values = Vec::new();
    let mut ambiguous = Vec::new();
    for (x, fx, med) in refined {
        let ratio = fx / med;
        if ratio < eps_div {
            roots.push(x);
            root_values.push(fx);
        } else if ratio < AMBIGUOUS_RATIO {
            ambiguous.push(x);
        }
    }
    Ok(DivisorScan {
        kappa,
        values,
        roots,
        root_values,
        ambiguous,
        period,
    })
}
