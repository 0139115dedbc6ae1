//! Series continuation of interior data into the gaps, and recovery of a
//! phantom from its Hilbert transform plus prior knowledge on I_i.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::asymptotics::lambda_asymptotic_slope;
use crate::geometry::{weight_from_offsets, GapGeometry};
use crate::quad::gauss_rule;
use crate::spectral::SpectralDecomposition;
use crate::surface::SurfaceData;
use crate::{Error, Result};

/// Coefficients of ψ = Σ ψ_n f_n on I_i and φ = Σ φ_n h_n on I_e.
#[derive(Debug, Clone)]
pub struct ContinuationSeries {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    /// Highest index used.
    pub n_max: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct ContinuedValue {
    pub z: f64,
    pub value: f64,
    pub tail_bound: f64,
    /// tail_bound is within the requested accuracy.
    pub converged: bool,
}

fn check_nmax(spec: &SpectralDecomposition, n_max: usize) -> Result<usize> {
    let r = spec.resolved_count();
    if r == 0 {
        return Err(Error::BelowNoiseFloor { n: 0 });
    }
    Ok(n_max.min(r - 1))
}

/// φ_n = ∫_{I_e} φ ĥ_n / sqrt(w), ψ_n = 2 λ_n φ_n, from samples of φ on the
/// exterior Nyström nodes. Indices above the noise floor are dropped.
pub fn decompose(spec: &SpectralDecomposition, phi_e: &[f64], n_max: usize) -> Result<ContinuationSeries> {
    if phi_e.len() != spec.grid.ne() {
        return Err(Error::InvalidArgument(format!(
            "expected {} exterior samples, got {}",
            spec.grid.ne(),
            phi_e.len()
        )));
    }
    let n_max = check_nmax(spec, n_max)?;
    let g = &spec.grid;
    let mut phi = Vec::with_capacity(n_max + 1);
    let mut psi = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let h = spec.h_hat(n);
        let c: f64 = (0..g.ne())
            .map(|e| g.we[e] * phi_e[e] * h[e] / g.ww_e[e].sqrt())
            .sum();
        phi.push(c);
        psi.push(2.0 * spec.lambda[n] * c);
    }
    Ok(ContinuationSeries { phi, psi, n_max })
}

/// ψ_n = ∫_{I_i} ψ f_n / w from samples of ψ on the interior nodes.
pub fn from_interior(spec: &SpectralDecomposition, psi_i: &[f64], n_max: usize) -> Result<ContinuationSeries> {
    if psi_i.len() != spec.grid.ni() {
        return Err(Error::InvalidArgument(format!(
            "expected {} interior samples, got {}",
            spec.grid.ni(),
            psi_i.len()
        )));
    }
    let n_max = check_nmax(spec, n_max)?;
    let g = &spec.grid;
    let mut phi = Vec::with_capacity(n_max + 1);
    let mut psi = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let c: f64 = (0..g.ni())
            .map(|i| g.wi[i].sqrt() * spec.u[(i, n)] * psi_i[i] / g.ww_i[i].sqrt())
            .sum();
        psi.push(c);
        phi.push(c / (2.0 * spec.lambda[n]));
    }
    Ok(ContinuationSeries { phi, psi, n_max })
}

/// Empirical C_ω: max over n ≤ n_max and gap samples ω away from the
/// endpoints of |f_n(z)| e^{-κ_n (Re g(z) + 1/2)}.
pub fn fit_c_omega(
    spec: &SpectralDecomposition,
    surface: &SurfaceData,
    omega: f64,
    n_max: usize,
) -> Result<f64> {
    let n_max = check_nmax(spec, n_max)?;
    let geom = spec.geometry();
    let mut pts = Vec::new();
    for j in 0..geom.genus() {
        let gap = geom.gap(j);
        for k in 0..=20 {
            pts.push(gap.lo + omega + (gap.len() - 2.0 * omega) * k as f64 / 20.0);
        }
    }
    let reg: Vec<f64> = pts
        .iter()
        .map(|&x| surface.re_g_real(x))
        .collect::<Result<_>>()?;
    let mut c: f64 = 0.0;
    for n in 0..=n_max {
        let f = spec.f_weighted_real(n, &pts)?;
        let k = spec.kappa(n);
        for i in 0..pts.len() {
            c = c.max(f[i].abs() * (-k * (reg[i] + 0.5)).exp());
        }
    }
    Ok(c)
}

impl ContinuationSeries {
    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    /// φ* = max |φ_n|.
    pub fn phi_star(&self) -> f64 {
        self.phi.iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    /// Partial sum Σ_{n ≤ n_max} ψ_n f_n(z) at real z off I_e.
    pub fn evaluate(&self, spec: &SpectralDecomposition, z: f64) -> Result<f64> {
        let mut s = 0.0;
        for n in 0..self.len() {
            if self.psi[n] != 0.0 {
                s += self.psi[n] * spec.f_weighted_real(n, &[z])?[0];
            }
        }
        Ok(s)
    }

    /// Terms |ψ_n f_n(z)|, for convergence diagnostics.
    pub fn terms(&self, spec: &SpectralDecomposition, z: f64) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|n| Ok((self.psi[n] * spec.f_weighted_real(n, &[z])?[0]).abs()))
            .collect()
    }

    /// Tail bound 2 C_ω φ* Σ_{n > n_max} e^{κ_n (Re g(z) - 1/2)} with κ_n
    /// continued past n_max by the asymptotic spacing π/|Im τ_11|.
    pub fn tail_bound(
        &self,
        spec: &SpectralDecomposition,
        surface: &SurfaceData,
        c_omega: f64,
        z: f64,
    ) -> Result<f64> {
        let reg = surface.re_g_real(z)?;
        let e = reg - 0.5;
        let p = lambda_asymptotic_slope(surface);
        let k = spec.kappa(self.n_max);
        let q = (p * e).exp();
        Ok(2.0 * c_omega * self.phi_star() * (k * e).exp() * q / (1.0 - q))
    }

    pub fn continue_psi(
        &self,
        spec: &SpectralDecomposition,
        surface: &SurfaceData,
        c_omega: f64,
        z: f64,
        accuracy: f64,
    ) -> Result<ContinuedValue> {
        let geom = spec.geometry();
        if !(z > geom.endpoints()[1] && z < geom.endpoints()[2 * geom.genus()]) {
            return Err(Error::InvalidArgument(format!(
                "z = {z} is not inside the gaps or I_i"
            )));
        }
        let value = self.evaluate(spec, z)?;
        let tail_bound = self.tail_bound(spec, surface, c_omega, z)?;
        Ok(ContinuedValue {
            z,
            value,
            tail_bound,
            converged: tail_bound <= accuracy,
        })
    }
}

/// Direct evaluation of ψ(z) = -(w(z)/π) ∫_{I_e} φ(x) / (w(x) (x - z)) dx on a
/// sigmoidal rule, independent of the Nyström grid.
pub fn direct_psi<F: Fn(f64) -> f64>(geom: &GapGeometry, phi: F, z: f64, order: usize) -> f64 {
    let mut s = 0.0;
    for cut in geom.exterior_cuts() {
        let rule = geom.sigmoidal_rule(cut.index, order);
        for i in 0..rule.len() {
            let x = rule.nodes[i];
            s += rule.weights[i] * phi(x) / (weight_from_offsets(&rule.offsets[i]) * (x - z));
        }
    }
    -geom.weight(C64::from(z)).re * s / PI
}

/// Phantom f = w p with p a polynomial (coefficients in increasing degree).
#[derive(Debug, Clone)]
pub struct Phantom {
    pub coeffs: Vec<f64>,
    first: f64,
    last: f64,
}

fn double_factorial(n: i64) -> f64 {
    let mut r = 1.0;
    let mut k = n;
    while k > 1 {
        r *= k as f64;
        k -= 2;
    }
    r
}

impl Phantom {
    pub fn new(geom: &GapGeometry, coeffs: Vec<f64>) -> Self {
        Self {
            coeffs,
            first: geom.first(),
            last: geom.last(),
        }
    }

    /// p ≡ 1 plus `degree` further monomials with coefficient 1/(k+1).
    pub fn of_degree(geom: &GapGeometry, degree: usize) -> Self {
        Self::new(geom, (0..=degree).map(|k| 1.0 / (k as f64 + 1.0)).collect())
    }

    pub fn p(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn f(&self, t: f64) -> f64 {
        let w = if t <= self.first || t >= self.last {
            0.0
        } else {
            ((self.last - t) * (t - self.first)).sqrt()
        };
        w * self.p(t)
    }

    /// φ(x) = (1/π) PV ∫ f(t)/(t - x) dt for x in (a_1, a_2g+2), in closed form.
    ///
    /// With t = c + r s the transform reduces to (r/π) PV ∫ sqrt(1-s²) Q(s)/(s-σ) ds,
    /// and for monomials (1/π) PV ∫ sqrt(1-s²) s^k/(s-σ) ds
    /// = Σ_{j<k} σ^{k-1-j} μ_j - σ^{k+1}, with μ_j the moments of sqrt(1-s²)/π.
    pub fn phi(&self, x: f64) -> f64 {
        let c = 0.5 * (self.first + self.last);
        let r = 0.5 * (self.last - self.first);
        let sigma = (x - c) / r;
        // Q(s) = p(c + r s)
        let deg = self.coeffs.len();
        let mut q = vec![0.0; deg];
        for (k, &a) in self.coeffs.iter().enumerate() {
            // (c + r s)^k
            let mut binom = 1.0;
            for j in 0..=k {
                q[j] += a * binom * c.powi((k - j) as i32) * r.powi(j as i32);
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
        }
        let mu = |j: usize| -> f64 {
            if j % 2 == 1 {
                0.0
            } else {
                double_factorial(j as i64 - 1) / double_factorial(j as i64 + 2)
            }
        };
        let mut h = 0.0;
        for (k, &qk) in q.iter().enumerate() {
            let mut t = -sigma.powi(k as i32 + 1);
            for j in 0..k {
                t += sigma.powi((k - 1 - j) as i32) * mu(j);
            }
            h += qk * t;
        }
        r * h
    }
}

/// PV ∫_{a_2}^{a_2g+1} φ(x) / (w(x) (x - y)) dx for y inside, by subtracting
/// the value at y and splitting the Gauss rule at y.
pub fn pv_inner<F: Fn(f64) -> f64>(geom: &GapGeometry, phi: F, y: f64, order: usize) -> Result<f64> {
    let a = geom.endpoints()[1];
    let b = geom.endpoints()[2 * geom.genus()];
    if !(y > a && y < b) {
        return Err(Error::InvalidArgument(format!("{y} is outside ({a}, {b})")));
    }
    let h = |x: f64| phi(x) / geom.weight_real(x);
    let hy = h(y);
    let mut s = hy * ((b - y) / (y - a)).ln();
    for (lo, hi) in [(a, y), (y, b)] {
        let (xs, ws) = gauss_rule(lo, hi, order);
        for (x, w) in xs.iter().zip(&ws) {
            s += w * (h(*x) - hy) / (x - y);
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy)]
pub struct RecoveryPoint {
    pub z: f64,
    pub recovered: f64,
    pub truth: f64,
    pub abs_err: f64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone)]
pub struct Recovery {
    pub series: ContinuationSeries,
    pub points: Vec<RecoveryPoint>,
}

impl Recovery {
    pub fn max_rel_err(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.abs_err / p.truth.abs().max(1e-300))
            .fold(0.0, f64::max)
    }
}

/// End-to-end interior recovery: data φ = H f on the whole line segment, prior
/// f on I_i; ψ on I_i is continued into the gaps and f recovered there.
pub fn recover_roi(
    spec: &SpectralDecomposition,
    surface: &SurfaceData,
    phantom: &Phantom,
    n_max: usize,
    omega: f64,
    points: &[f64],
) -> Result<Recovery> {
    let geom = spec.geometry();
    let pv_order = 64;
    let psi_i: Vec<f64> = spec
        .grid
        .xi
        .iter()
        .map(|&y| {
            Ok(phantom.f(y)
                + geom.weight_real(y) / PI * pv_inner(geom, |x| phantom.phi(x), y, pv_order)?)
        })
        .collect::<Result<_>>()?;
    let series = from_interior(spec, &psi_i, n_max)?;
    let c_omega = fit_c_omega(spec, surface, omega, series.n_max)?;
    let mut out = Vec::with_capacity(points.len());
    for &z in points {
        let psi = series.evaluate(spec, z)?;
        let f = psi - geom.weight_real(z) / PI * pv_inner(geom, |x| phantom.phi(x), z, pv_order)?;
        let truth = phantom.f(z);
        out.push(RecoveryPoint {
            z,
            recovered: f,
            truth,
            abs_err: (f - truth).abs(),
            tail_bound: series.tail_bound(spec, surface, c_omega, z)?,
        });
    }
    Ok(Recovery {
        series,
        points: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (SurfaceData, SpectralDecomposition) {
        let s = SurfaceData::reference();
        let sp = SpectralDecomposition::compute(s.geometry(), 96).unwrap();
        (s, sp)
    }

    #[test]
    fn phantom_transform_matches_quadrature() {
        let geom = GapGeometry::reference();
        let ph = Phantom::new(&geom, vec![0.3, -0.2, 0.5]);
        // PV ∫ f(t)/(t-x) dt with subtraction on a cosine rule of [a_1, a_2g+2]
        let x = 0.37;
        let (t, w) = crate::quad::gauss_legendre(400);
        let mut s = 0.0;
        for (ti, wi) in t.iter().zip(&w) {
            let th = 0.5 * (ti + 1.0) * PI;
            let tt = -3.0 * th.cos();
            let dt = 3.0 * th.sin() * 0.5 * PI * wi;
            s += dt * (ph.f(tt) - ph.f(x)) / (tt - x);
        }
        s += ph.f(x) * ((3.0 - x) / (x + 3.0)).ln();
        assert!((s / PI - ph.phi(x)).abs() < 1e-8);
        // p ≡ 1 gives c - x
        let one = Phantom::new(&geom, vec![1.0]);
        assert!((one.phi(x) + x).abs() < 1e-14);
    }

    #[test]
    fn decomposition_of_a_singular_function() {
        let (_, sp) = setup();
        let g = &sp.grid;
        let h3 = sp.h_hat(3);
        // h_3 = sqrt(w) ĥ_3
        let phi: Vec<f64> = (0..g.ne()).map(|e| g.ww_e[e].sqrt() * h3[e]).collect();
        let ser = decompose(&sp, &phi, 10).unwrap();
        for n in 0..=10 {
            let e = if n == 3 { 1.0 } else { 0.0 };
            assert!((ser.phi[n] - e).abs() < 1e-8);
            assert_eq!(ser.psi[n], 2.0 * sp.lambda[n] * ser.phi[n]);
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let (s, sp) = setup();
        let ser = decompose(&sp, &vec![0.0; sp.grid.ne()], 12).unwrap();
        let v = ser.continue_psi(&sp, &s, 1.0, -1.5, 1e-3).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn pv_inner_matches_closed_form_for_w() {
        // with φ = c - x, -(w/π) PV ∫_{I} φ/(w (x-y)) = w(y); the inner part is
        // checked against the exterior part computed directly.
        let geom = GapGeometry::reference();
        let y = -1.4;
        let inner = pv_inner(&geom, |x| -x, y, 64).unwrap();
        let outer = -direct_psi(&geom, |x| -x, y, 200) * PI / geom.weight_real(y);
        let total = -(geom.weight_real(y) / PI) * (inner + outer);
        assert!((total - geom.weight_real(y)).abs() < 1e-8);
    }
}
