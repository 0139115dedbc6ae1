//! The theta-function model Υ of the singular functions, the asymptotic
//! singular functions f̃_n, h̃_n, and the decay law of λ_n.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::spectral::SpectralDecomposition;
use crate::surface::{CVec, SurfaceData};
use crate::theta::{KappaLine, ThetaContext};
use crate::Result;

/// π / |Im τ_11|, the predicted growth of -ln λ_n per index.
pub fn lambda_asymptotic_slope(s: &SurfaceData) -> f64 {
    PI / s.tau11().im.abs()
}

/// Boundary values on a set of real points of I, tabulated once and reused for
/// every n.
#[derive(Debug, Clone)]
pub struct BoundaryTable {
    pub x: Vec<f64>,
    pub u_plus: Vec<CVec>,
    pub im_g: Vec<f64>,
    pub im_d: Vec<f64>,
    pub r_plus: Vec<C64>,
}

impl BoundaryTable {
    pub fn new(s: &SurfaceData, xs: &[f64]) -> Result<Self> {
        let mut t = Self {
            x: xs.to_vec(),
            u_plus: Vec::with_capacity(xs.len()),
            im_g: Vec::with_capacity(xs.len()),
            im_d: Vec::with_capacity(xs.len()),
            r_plus: Vec::with_capacity(xs.len()),
        };
        for &x in xs {
            let u = s.abel_plus(x)?;
            t.im_g.push((0.5 - 2.0 * u[0]).im);
            t.u_plus.push(u);
            t.im_d.push(s.d_plus(x)?.im);
            t.r_plus.push(s.r_plus(x));
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct AsymptoticTriple {
    pub n: usize,
    pub kappa_tilde: f64,
    /// 𝐟_n = W(κ̃_n) - W_0 + τ_1.
    pub f_vec: CVec,
    pub lambda_model: f64,
    /// Radicands of the square-root prefactor for s = +1 and s = -1.
    pub radicand: [C64; 2],
    /// Selected branch s ∈ {+1, -1}.
    pub branch: i32,
}

impl AsymptoticTriple {
    fn radicand_for(&self, s: i32) -> C64 {
        if s > 0 {
            self.radicand[0]
        } else {
            self.radicand[1]
        }
    }
}

#[derive(Debug, Clone)]
pub struct Asymptotics {
    ctx: ThetaContext,
    line: KappaLine,
    u_inf: CVec,
    c0: C64,
}

impl Asymptotics {
    pub fn new(s: &SurfaceData, ctx: &ThetaContext) -> Self {
        let line = KappaLine::new(s);
        let grad = ctx.grad(line.w0());
        let g = s.genus();
        // C_0 = (A^{-1} ∇Θ(W_0))_g
        let c0: C64 = (0..g).map(|j| s.a_inv[(g - 1, j)] * grad[j]).sum();
        Self {
            ctx: ctx.clone(),
            line,
            u_inf: s.u_inf.map(C64::from),
            c0,
        }
    }

    pub fn line(&self) -> &KappaLine {
        &self.line
    }

    pub fn theta_context(&self) -> &ThetaContext {
        &self.ctx
    }

    fn radicand(&self, f: &CVec, s: f64) -> C64 {
        let w0 = self.line.w0();
        let two_u = &self.u_inf * C64::from(2.0 * s);
        let num = self.ctx.theta(&(w0 + &two_u));
        let den = self.ctx.theta(&(f + &two_u));
        let grad = self.ctx.grad(f);
        let dir: C64 = (0..f.len()).map(|k| self.line.tau1[k] * grad[k]).sum();
        num / den * self.c0 / (C64::new(0.0, 1.0) * dir)
    }

    /// Builds the model data for index n. The branch with the better
    /// conditioned radicand is selected; on symmetric geometries the other one
    /// is 0/0 for alternate n.
    pub fn triple(&self, n: usize, kappa_tilde: f64) -> AsymptoticTriple {
        let f_vec = self.line.f_vec(kappa_tilde);
        let rp = self.radicand(&f_vec, 1.0);
        let rm = self.radicand(&f_vec, -1.0);
        let score = |r: C64| {
            let v = r.norm().ln().abs();
            if v.is_finite() {
                v
            } else {
                f64::INFINITY
            }
        };
        let branch = if score(rp) <= score(rm) { 1 } else { -1 };
        AsymptoticTriple {
            n,
            kappa_tilde,
            f_vec,
            lambda_model: (-kappa_tilde).exp(),
            radicand: [rp, rm],
            branch,
        }
    }

    /// Υ for the branch s at a point with boundary values u_+ and r_+.
    pub fn upsilon_branch(&self, t: &AsymptoticTriple, s: i32, u_plus: &CVec, r_plus: C64) -> C64 {
        let pref = (-t.radicand_for(s)).sqrt();
        let su = &self.u_inf * C64::from(s as f64);
        let base = u_plus + su;
        let num = self.ctx.theta(&(&base + &t.f_vec));
        let den = self.ctx.theta(&(&base + self.line.w0()));
        (s as f64) * pref * num * r_plus / den
    }

    pub fn upsilon(&self, t: &AsymptoticTriple, u_plus: &CVec, r_plus: C64) -> C64 {
        self.upsilon_branch(t, t.branch, u_plus, r_plus)
    }

    pub fn upsilon_at(&self, s: &SurfaceData, t: &AsymptoticTriple, x: f64) -> Result<C64> {
        Ok(self.upsilon(t, &s.abel_plus(x)?, s.r_plus(x)))
    }

    fn model(&self, t: &AsymptoticTriple, table: &BoundaryTable) -> Vec<C64> {
        (0..table.len())
            .map(|i| {
                let ups = self.upsilon(t, &table.u_plus[i], table.r_plus[i]);
                let ph = -t.kappa_tilde * table.im_g[i] - table.im_d[i];
                2.0 * ups * C64::new(0.0, ph).exp()
            })
            .collect()
    }

    /// Im f̃_n at the table points (f̃_n = i Im[2Υ e^{-iκ̃ Im g_+ - i Im d_+}]).
    pub fn f_tilde(&self, t: &AsymptoticTriple, table: &BoundaryTable) -> Vec<f64> {
        self.model(t, table).iter().map(|z| z.im).collect()
    }

    /// h̃_n = Re[2Υ e^{-iκ̃ Im g_+ - i Im d_+}] at points of I_e.
    pub fn h_tilde(&self, t: &AsymptoticTriple, table: &BoundaryTable) -> Vec<f64> {
        self.model(t, table).iter().map(|z| z.re).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub n: usize,
    /// ‖model‖ in L² of the interval family.
    pub norm_model: f64,
    /// Global sign maximizing the inner product with the Nyström function.
    pub sign: f64,
    pub l2_gap: f64,
    /// sup |Nyström - sign·model| over the middle 80% of each subinterval.
    pub sup_mid: f64,
}

fn compare(
    n: usize,
    x: &[f64],
    w: &[f64],
    truth: &[f64],
    model: &[f64],
    intervals: &[(f64, f64)],
) -> Comparison {
    let norm_model = x
        .iter()
        .enumerate()
        .map(|(i, _)| w[i] * model[i] * model[i])
        .sum::<f64>()
        .sqrt();
    let ip: f64 = (0..x.len()).map(|i| w[i] * model[i] * truth[i]).sum();
    let sign = if ip >= 0.0 { 1.0 } else { -1.0 };
    let l2_gap = (0..x.len())
        .map(|i| w[i] * (truth[i] - sign * model[i]).powi(2))
        .sum::<f64>()
        .sqrt();
    let sup_mid = (0..x.len())
        .filter(|&i| {
            intervals.iter().any(|&(lo, hi)| {
                let m = 0.1 * (hi - lo);
                x[i] >= lo + m && x[i] <= hi - m
            })
        })
        .map(|i| (truth[i] - sign * model[i]).abs())
        .fold(0.0, f64::max);
    Comparison {
        n,
        norm_model,
        sign,
        l2_gap,
        sup_mid,
    }
}

/// Compares Im f̂_n with ±f̃_n on the interior Nyström nodes.
pub fn compare_f(
    spec: &SpectralDecomposition,
    asym: &Asymptotics,
    t: &AsymptoticTriple,
    table_i: &BoundaryTable,
) -> Comparison {
    let g = &spec.grid;
    let model = asym.f_tilde(t, table_i);
    let truth = spec.f_hat(t.n);
    let iv: Vec<(f64, f64)> = spec
        .geometry()
        .interior_cuts()
        .iter()
        .map(|c| (c.lo, c.hi))
        .collect();
    compare(t.n, &g.xi, &g.wi, &truth, &model, &iv)
}

/// Compares ĥ_n with ±h̃_n on the exterior Nyström nodes.
pub fn compare_h(
    spec: &SpectralDecomposition,
    asym: &Asymptotics,
    t: &AsymptoticTriple,
    table_e: &BoundaryTable,
) -> Comparison {
    let g = &spec.grid;
    let model = asym.h_tilde(t, table_e);
    let truth = spec.h_hat(t.n);
    let iv: Vec<(f64, f64)> = spec
        .geometry()
        .exterior_cuts()
        .iter()
        .map(|c| (c.lo, c.hi))
        .collect();
    compare(t.n, &g.xe, &g.we, &truth, &model, &iv)
}
