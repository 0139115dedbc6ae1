//! Hyperelliptic surface data: the matrix A, normalized differentials,
//! periods, the Abel map and the scalar functions g, d and r.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::geometry::{radical_plus_from_offsets, sqrt_plus, weight_from_offsets, GapGeometry};
use crate::quad::{gauss_legendre, SegmentRule};
use crate::{Error, Result};

pub type CVec = DVector<C64>;

/// Order of the sigmoidal rules used for the logarithmic integrands in d.
pub const LOG_ORDER: usize = 160;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone)]
pub struct SurfaceData {
    geom: GapGeometry,
    order: usize,
    rules: Vec<SegmentRule>,
    log_rules: Vec<SegmentRule>,
    pub a: DMatrix<f64>,
    pub a_inv: DMatrix<f64>,
    /// Integral of the normalized differentials over each segment (upper side).
    seg_periods: Vec<CVec>,
    /// Partial sums of `seg_periods`: Abel map at the left end of each segment.
    seg_starts: Vec<CVec>,
    pub tau: DMatrix<C64>,
    pub u_inf: DVector<f64>,
    /// [delta_1, ..., delta_{g-1}, delta_0].
    pub delta: DVector<f64>,
    delta_imag: f64,
    /// [Omega_1, ..., Omega_{g-1}, Omega_0].
    pub omega: DVector<f64>,
    pub l: DMatrix<f64>,
    pub l_inv: DMatrix<f64>,
    d_inf: C64,
}

/// ∫ x^j h(x) / R_+(x) dx over one rule, j = 0..g-1.
fn moments<F: Fn(usize) -> C64>(rule: &SegmentRule, g: usize, h: F) -> Vec<C64> {
    let mut m = vec![C64::from(0.0); g];
    for (i, (&x, &wt)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let base = h(i) * wt / radical_plus_from_offsets(&rule.offsets[i]);
        let mut p = 1.0;
        for mj in m.iter_mut() {
            *mj += base * p;
            p *= x;
        }
    }
    m
}

/// The matrix A before discarding its (vanishing) imaginary part.
pub fn compute_a_complex(geom: &GapGeometry, rules: &[SegmentRule]) -> DMatrix<C64> {
    let g = geom.genus();
    let mut a = DMatrix::from_element(g, g, C64::from(0.0));
    for k in 0..g - 1 {
        let m = moments(&rules[2 * k + 1], g, |_| C64::from(1.0));
        for j in 0..g {
            a[(k, j)] = 2.0 * m[j];
        }
    }
    for rule in rules {
        let m = moments(rule, g, |_| C64::from(1.0));
        for j in 0..g {
            a[(g - 1, j)] += 2.0 * m[j];
        }
    }
    a
}

fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// The integer matrix L: identity with -1 in the last column above the diagonal.
pub fn l_matrix(g: usize) -> DMatrix<f64> {
    let mut l = DMatrix::identity(g, g);
    for i in 0..g - 1 {
        l[(i, g - 1)] = -1.0;
    }
    l
}

pub fn l_matrix_inverse(g: usize) -> DMatrix<f64> {
    let mut l = DMatrix::identity(g, g);
    for i in 0..g - 1 {
        l[(i, g - 1)] = 1.0;
    }
    l
}

impl SurfaceData {
    pub fn build(geom: &GapGeometry, order: usize) -> Result<Self> {
        let g = geom.genus();
        let rules = geom.build_rules(order)?;
        let log_rules: Vec<_> = (0..geom.num_segments())
            .map(|k| geom.sigmoidal_rule(k, LOG_ORDER))
            .collect();

        let ac = compute_a_complex(geom, &rules);
        let scale = ac.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let im = ac.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if im > 1e-8 * scale {
            return Err(Error::Numerical(format!(
                "matrix A has an imaginary part of size {im:.3e}"
            )));
        }
        let a = ac.map(|z| z.re);
        let cond = condition_number(&a);
        if !(cond < 1e12) {
            return Err(Error::SingularA(cond));
        }
        let a_inv = a
            .clone()
            .try_inverse()
            .ok_or(Error::SingularA(f64::INFINITY))?;

        let mut s = Self {
            geom: geom.clone(),
            order,
            rules,
            log_rules,
            a,
            a_inv,
            seg_periods: Vec::new(),
            seg_starts: Vec::new(),
            tau: DMatrix::from_element(g, g, C64::from(0.0)),
            u_inf: DVector::zeros(g),
            delta: DVector::zeros(g),
            delta_imag: 0.0,
            omega: DVector::zeros(g),
            l: l_matrix(g),
            l_inv: l_matrix_inverse(g),
            d_inf: C64::from(0.0),
        };

        s.seg_periods = s
            .rules
            .iter()
            .map(|r| s.normalize(&moments(r, g, |_| C64::from(1.0))))
            .collect();
        let mut acc = CVec::zeros(g);
        for p in &s.seg_periods {
            s.seg_starts.push(acc.clone());
            acc += p;
        }

        s.tau = s.compute_tau()?;
        s.u_inf = s.compute_u_inf();
        let (delta, delta_imag) = s.compute_delta()?;
        s.delta = delta;
        s.delta_imag = delta_imag;
        s.omega = s.omega_from_tau();
        s.d_inf = s.compute_d_inf();
        Ok(s)
    }

    pub fn reference() -> Self {
        Self::build(&GapGeometry::reference(), 64).expect("reference geometry")
    }

    pub fn geometry(&self) -> &GapGeometry {
        &self.geom
    }

    pub fn genus(&self) -> usize {
        self.geom.genus()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rules(&self) -> &[SegmentRule] {
        &self.rules
    }

    /// Row vector of moments times A^{-1}, returned as a column.
    pub fn normalize(&self, m: &[C64]) -> CVec {
        let g = self.genus();
        CVec::from_fn(g, |i, _| {
            (0..g).map(|j| m[j] * self.a_inv[(j, i)]).sum::<C64>()
        })
    }

    /// The normalized differentials (ω_1, ..., ω_g) / dz at z.
    pub fn differentials(&self, z: C64) -> CVec {
        let g = self.genus();
        let r = self.geom.radical(z);
        let mut m = Vec::with_capacity(g);
        let mut p = C64::from(1.0);
        for _ in 0..g {
            m.push(p / r);
            p *= z;
        }
        self.normalize(&m)
    }

    /// Integral of ω_+ over segment `k`.
    pub fn segment_period(&self, k: usize) -> &CVec {
        &self.seg_periods[k]
    }

    /// Integral of ω_+ over cut `k`, k = 0..=g. Purely imaginary.
    pub fn cut_period(&self, k: usize) -> &CVec {
        &self.seg_periods[2 * k]
    }

    /// Integral of ω over gap `j`, j = 0..g-1. Real.
    pub fn gap_period(&self, j: usize) -> &CVec {
        &self.seg_periods[2 * j + 1]
    }

    fn compute_tau(&self) -> Result<DMatrix<C64>> {
        let g = self.genus();
        let mut tau = DMatrix::from_element(g, g, C64::from(0.0));
        for i in 0..g - 1 {
            for m in i + 1..g {
                for c in 0..g {
                    tau[(i, c)] += 2.0 * self.cut_period(m)[c];
                }
            }
        }
        for c in 0..g {
            tau[(g - 1, c)] = 2.0 * self.cut_period(g)[c];
        }
        let y = tau.map(|z| z.im);
        let ys = (&y + y.transpose()) * 0.5;
        let min_eig = SymmetricEigen::new(ys)
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if !(min_eig > 0.0) {
            return Err(Error::NotPositiveDefinite(min_eig));
        }
        Ok(tau)
    }

    pub fn tau1(&self) -> CVec {
        self.tau.column(0).into_owned()
    }

    pub fn tau11(&self) -> C64 {
        self.tau[(0, 0)]
    }

    pub fn tau_symmetry_defect(&self) -> f64 {
        (&self.tau - self.tau.transpose())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn tau_real_part_max(&self) -> f64 {
        self.tau.iter().map(|z| z.re.abs()).fold(0.0, f64::max)
    }

    pub fn im_tau_min_eigenvalue(&self) -> f64 {
        let y = self.tau.map(|z| z.im);
        let ys = (&y + y.transpose()) * 0.5;
        SymmetricEigen::new(ys)
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// -∫_{-∞}^{a_1} ω, with x = a_1 - s/(1-s) mapping [0,1) onto the ray.
    fn compute_u_inf(&self) -> DVector<f64> {
        let g = self.genus();
        let a1 = self.geom.first();
        let n = 2 * self.order;
        let (t, wt) = gauss_legendre(n);
        let mut m = vec![C64::from(0.0); g];
        for (ti, wi) in t.iter().zip(&wt) {
            let th = 0.5 * (ti + 1.0) * PI;
            let s = 0.5 * (1.0 - th.cos());
            let ds = 0.5 * th.sin() * 0.5 * PI * wi;
            let x = a1 - s / (1.0 - s);
            let dx = ds / ((1.0 - s) * (1.0 - s));
            let r = self.geom.radical(C64::from(x)).re;
            let mut p = 1.0;
            for mj in m.iter_mut() {
                *mj += dx * p / r;
                p *= x;
            }
        }
        -self.normalize(&m).map(|z| z.re)
    }

    /// Abel map from a_1 to real x along the upper side of the axis.
    pub fn abel_plus(&self, x: f64) -> Result<CVec> {
        let k = self
            .geom
            .locate(x)
            .ok_or_else(|| Error::InvalidArgument(format!("{x} lies outside [a_1, a_2g+2]")))?;
        let seg = self.geom.segment(k);
        let mut out = self.seg_starts[k].clone();
        if x > seg.lo {
            let rule = self.geom.partial_rule(k, x, self.order);
            out += self.normalize(&moments(&rule, self.genus(), |_| C64::from(1.0)));
        }
        Ok(out)
    }

    pub fn abel_minus(&self, x: f64) -> Result<CVec> {
        Ok(self.abel_plus(x)?.map(|z| z.conj()))
    }

    /// ∫_z^{z + i∞} ω along the vertical ray, with geometric panels.
    fn ray_integral(&self, z: C64) -> CVec {
        let g = self.genus();
        let rho = self
            .geom
            .endpoints()
            .iter()
            .map(|&a| (z - a).norm())
            .fold(f64::INFINITY, f64::min)
            .max(1e-14);
        let span = self.geom.last() - self.geom.first();
        let t_max = 50.0 * (1.0 + z.norm() + span);
        let (gt, gw) = gauss_legendre(24);
        let mut out = CVec::zeros(g);
        let mut lo = 0.0;
        let mut hi = 0.5 * rho.min(span);
        loop {
            let hi_c = hi.min(t_max);
            let c = 0.5 * (lo + hi_c);
            let r = 0.5 * (hi_c - lo);
            for (ti, wi) in gt.iter().zip(&gw) {
                let t = c + r * ti;
                out += self.differentials(z + I * t) * (I * r * wi);
            }
            if hi_c >= t_max {
                break;
            }
            lo = hi_c;
            hi = 3.0 * hi_c;
        }
        // tail t = t_max / (1 - s)
        for (ti, wi) in gt.iter().zip(&gw) {
            let s = 0.5 * (ti + 1.0);
            let t = t_max / (1.0 - s);
            let dt = t_max / ((1.0 - s) * (1.0 - s)) * 0.5 * wi;
            out += self.differentials(z + I * t) * (I * dt);
        }
        out
    }

    /// Abel map in the plane cut along [a_1, ∞). Real z in [a_1, a_2g+2]
    /// gives the upper boundary value.
    pub fn abel(&self, z: C64) -> Result<CVec> {
        if z.im == 0.0 {
            if self.geom.is_branch_point(z) && z.re != self.geom.first() {
                return Err(Error::BranchPoint(z.re));
            }
            if z.re >= self.geom.first() && z.re <= self.geom.last() {
                return self.abel_plus(z.re);
            }
        }
        if z.im < 0.0 {
            return Ok(self.abel(z.conj())?.map(|v| v.conj()));
        }
        let uinf = self.u_inf.map(C64::from);
        Ok(uinf - self.ray_integral(z))
    }

    pub fn u_infinity(&self) -> &DVector<f64> {
        &self.u_inf
    }

    /// Abel map at a_{2g+2} along the upper side.
    pub fn abel_last(&self) -> CVec {
        let n = self.seg_periods.len();
        &self.seg_starts[n - 1] + &self.seg_periods[n - 1]
    }

    // delta from the moment conditions that make d analytic at infinity
    fn compute_delta(&self) -> Result<(DVector<f64>, f64)> {
        let g = self.genus();
        let mut cm = CVec::zeros(g);
        for k in 0..=g {
            let rule = &self.log_rules[2 * k];
            let m = moments(rule, g, |i| {
                C64::from(-weight_from_offsets(&rule.offsets[i]).ln())
            });
            for j in 0..g {
                cm[j] += m[j];
            }
        }
        let mut gm = DMatrix::from_element(g, g, C64::from(0.0));
        for jj in 0..g {
            let m = moments(&self.rules[2 * jj + 1], g, |_| C64::from(1.0));
            for k in 0..g {
                gm[(k, jj)] = I * m[k];
            }
        }
        let sol = gm
            .lu()
            .solve(&(-cm))
            .ok_or_else(|| Error::Numerical("singular delta system".into()))?;
        let imag = sol.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        Ok((sol.map(|z| z.re), imag))
    }

    /// Largest imaginary part left over in the solved delta.
    pub fn delta_imag_residual(&self) -> f64 {
        self.delta_imag
    }

    /// The closed form 2π L^{-1}(2u(∞) - u(a_{2g+2})), reported for comparison.
    pub fn delta_closed_form(&self) -> DVector<f64> {
        let v = self.u_inf.map(|x| 2.0 * x) - self.abel_last().map(|z| z.re);
        &self.l_inv * v * (2.0 * PI)
    }

    /// Ω = -2i L^{-1} τ_1.
    pub fn omega_from_tau(&self) -> DVector<f64> {
        let t1 = self.tau1().map(|z| (-2.0 * I * z).re);
        &self.l_inv * t1
    }

    /// Ω from partial sums of cut periods of ω_1: Ω_m = 4i Σ_{k<=m} ∫_{cut k} ω_1.
    pub fn omega_from_cuts(&self) -> DVector<f64> {
        let g = self.genus();
        let mut acc = C64::from(0.0);
        DVector::from_fn(g, |m, _| {
            acc += self.cut_period(m)[0];
            (4.0 * I * acc).re
        })
    }

    // ---- g ----

    pub fn g_function(&self, z: C64) -> Result<C64> {
        Ok(0.5 - 2.0 * self.abel(z)?[0])
    }

    pub fn g_plus(&self, x: f64) -> Result<C64> {
        Ok(0.5 - 2.0 * self.abel_plus(x)?[0])
    }

    pub fn g_minus(&self, x: f64) -> Result<C64> {
        Ok(0.5 - 2.0 * self.abel_minus(x)?[0])
    }

    pub fn g_infinity(&self) -> f64 {
        0.5 - 2.0 * self.u_inf[0]
    }

    /// Re g on the real axis (continuous across gaps).
    pub fn re_g_real(&self, x: f64) -> Result<f64> {
        Ok(self.g_function(C64::from(x))?.re)
    }

    // ---- d ----

    // F = -ln w / R_+ on cuts, i δ_j / R_+ on gap j.
    fn jump_density(&self, k: usize, d: &[f64]) -> C64 {
        let r = radical_plus_from_offsets(d);
        if k.is_multiple_of(2) {
            C64::from(-weight_from_offsets(d).ln()) / r
        } else {
            I * self.delta[k / 2] / r
        }
    }

    /// d(z) = R(z)/(2πi) ∫ F(ζ)/(ζ - z) dζ for z off the real segment [a_1, a_2g+2].
    pub fn d_function(&self, z: C64) -> Result<C64> {
        if z.im == 0.0 && z.re >= self.geom.first() && z.re <= self.geom.last() {
            return Err(Error::InvalidArgument(
                "d on the real axis needs a side; use d_plus or d_minus".into(),
            ));
        }
        let mut s = C64::from(0.0);
        for (k, rule) in self.log_rules.iter().enumerate() {
            for i in 0..rule.len() {
                s += rule.weights[i] * self.jump_density(k, &rule.offsets[i])
                    / (rule.nodes[i] - z);
            }
        }
        Ok(self.geom.radical(z) * s / (2.0 * PI * I))
    }

    /// PV ∫ F(ζ)/(ζ - x) dζ, singularity subtracted on the segment of x.
    fn pv_jump(&self, x: f64) -> Result<C64> {
        let k0 = self
            .geom
            .locate(x)
            .ok_or_else(|| Error::InvalidArgument(format!("{x} lies outside [a_1, a_2g+2]")))?;
        if self.geom.endpoints().contains(&x) {
            return Err(Error::BranchPoint(x));
        }
        let seg = self.geom.segment(k0);
        let sx = ((x - seg.lo) * (seg.hi - x)).sqrt();
        let fx = self.jump_density(k0, &self.geom.offsets(x)) * sx;
        let mut pv = C64::from(0.0);
        for (k, rule) in self.log_rules.iter().enumerate() {
            for i in 0..rule.len() {
                let d = &rule.offsets[i];
                let f = self.jump_density(k, d);
                let z = rule.nodes[i];
                if k == k0 {
                    let sv = (d[k] * -d[k + 1]).sqrt();
                    pv += rule.weights[i] * (f * sv - fx) / (sv * (z - x));
                } else {
                    pv += rule.weights[i] * f / (z - x);
                }
            }
        }
        // PV ∫ dζ / (sqrt((ζ-lo)(hi-ζ)) (ζ-x)) vanishes inside the segment.
        Ok(pv)
    }

    /// Boundary value of d from above at x in (a_1, a_2g+2).
    pub fn d_plus(&self, x: f64) -> Result<C64> {
        let pv = self.pv_jump(x)?;
        let rp = self.geom.radical_plus(x);
        let k = self.geom.locate(x).unwrap();
        let f = self.jump_density(k, &self.geom.offsets(x));
        Ok(rp * (pv / (2.0 * PI * I) + 0.5 * f))
    }

    pub fn d_minus(&self, x: f64) -> Result<C64> {
        let pv = self.pv_jump(x)?;
        let rm = self.geom.radical_minus(x);
        let k = self.geom.locate(x).unwrap();
        let f = self.jump_density(k, &self.geom.offsets(x));
        Ok(rm * (pv / (2.0 * PI * I) - 0.5 * f))
    }

    fn compute_d_inf(&self) -> C64 {
        let g = self.genus() as i32;
        let mut s = C64::from(0.0);
        for (k, rule) in self.log_rules.iter().enumerate() {
            for i in 0..rule.len() {
                s += rule.weights[i]
                    * self.jump_density(k, &rule.offsets[i])
                    * rule.nodes[i].powi(g);
            }
        }
        -s / (2.0 * PI * I)
    }

    pub fn d_infinity(&self) -> C64 {
        self.d_inf
    }

    // ---- r ----

    /// Zero-based indices of the endpoints in J = {1, 5, 7, ..., 2g-1}.
    pub fn j_indices(&self) -> Vec<usize> {
        let g = self.genus();
        let mut j = vec![0];
        j.extend((5..2 * g).step_by(2).map(|m| m - 1));
        j
    }

    /// r(z) = ∏_J (z-a_j)^{1/4} / ∏_{J'} (z-a_l)^{1/4}, principal roots.
    pub fn r_function(&self, z: C64) -> C64 {
        let jset = self.j_indices();
        let mut out = C64::from(1.0);
        for (l, &a) in self.geom.endpoints().iter().enumerate() {
            let q = (z - a).sqrt().sqrt();
            if jset.contains(&l) {
                out *= q;
            } else {
                out /= q;
            }
        }
        out
    }

    pub fn r_plus(&self, x: f64) -> C64 {
        let jset = self.j_indices();
        let mut out = C64::from(1.0);
        for (l, &a) in self.geom.endpoints().iter().enumerate() {
            let q = sqrt_plus(x - a).sqrt();
            if jset.contains(&l) {
                out *= q;
            } else {
                out /= q;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surf() -> SurfaceData {
        SurfaceData::reference()
    }

    #[test]
    fn a_is_real_and_converged() {
        let geom = GapGeometry::reference();
        let r64 = geom.build_rules(64).unwrap();
        let r128 = geom.build_rules(128).unwrap();
        let a64 = compute_a_complex(&geom, &r64);
        let a128 = compute_a_complex(&geom, &r128);
        let scale = a128.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (x, y) in a64.iter().zip(a128.iter()) {
            assert!((x - y).norm() <= 1e-10 * scale);
            assert!(x.im.abs() < 1e-12);
        }
    }

    #[test]
    fn tau_structure() {
        let s = surf();
        assert!(s.tau_symmetry_defect() < 1e-10);
        assert!(s.tau_real_part_max() < 1e-10);
        assert!(s.im_tau_min_eigenvalue() > 0.0);
        assert!(s.tau11().im > 0.0);
    }

    #[test]
    fn differentials_are_normalized_on_gaps() {
        let s = surf();
        let g = s.genus();
        for j in 0..g - 1 {
            let p = s.gap_period(j) * C64::from(2.0);
            for i in 0..g {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((p[i] - e).norm() < 1e-9);
            }
        }
        let total = s.abel_last() * C64::from(2.0);
        for i in 0..g {
            let e = if i == g - 1 { 1.0 } else { 0.0 };
            assert!((total[i] - e).norm() < 1e-9);
        }
    }

    #[test]
    fn omega_routes_agree_and_l_inverts() {
        let s = surf();
        let d = (s.omega_from_tau() - s.omega_from_cuts()).amax();
        assert!(d < 1e-9, "{d}");
        let id = &s.l * &s.l_inv;
        assert_eq!(id, DMatrix::identity(s.genus(), s.genus()));
    }

    #[test]
    fn delta_is_real() {
        let s = surf();
        assert!(s.delta_imag_residual() < 1e-10);
    }

    #[test]
    fn abel_map_starts_at_zero_and_is_schwarz_symmetric() {
        let s = surf();
        assert_eq!(s.abel_plus(-3.0).unwrap().camax(), 0.0);
        let z = C64::new(0.4, 0.8);
        let u = s.abel(z).unwrap();
        let v = s.abel(z.conj()).unwrap();
        assert!((u - v.map(|c| c.conj())).camax() < 1e-14);
    }

    #[test]
    fn abel_map_path_independence() {
        // ray from z to infinity versus a straight segment from a gap point
        let s = surf();
        let z = C64::new(-0.7, 0.35);
        let x0 = -1.5;
        let mut u = s.abel_plus(x0).unwrap();
        let (t, w) = gauss_legendre(60);
        let dz = z - x0;
        for (ti, wi) in t.iter().zip(&w) {
            let p = C64::from(x0) + dz * 0.5 * (ti + 1.0);
            u += s.differentials(p) * (dz * 0.5 * wi);
        }
        let v = s.abel(z).unwrap();
        assert!((u - v).camax() < 1e-10);
    }

    #[test]
    fn g_boundary_values() {
        let s = surf();
        for &x in &[-2.7, -0.3, 0.6, 2.2] {
            let gp = s.g_plus(x).unwrap();
            let gm = s.g_minus(x).unwrap();
            let target = if x.abs() > 2.0 { 1.0 } else { -1.0 };
            assert!((gp + gm - target).norm() < 1e-8);
        }
        // gap jump i Ω_j
        for j in 0..2 {
            let x = s.geometry().gap(j).mid();
            let jump = s.g_plus(x).unwrap() - s.g_minus(x).unwrap();
            assert!((jump - I * s.omega[j]).norm() < 1e-9);
        }
    }

    #[test]
    fn re_g_inside_open_band_on_gaps() {
        let s = surf();
        for j in 0..2 {
            let gap = s.geometry().gap(j);
            for i in 1..20 {
                let x = gap.lo + gap.len() * i as f64 / 20.0;
                let v = s.re_g_real(x).unwrap();
                assert!(v.abs() < 0.5);
            }
        }
    }

    #[test]
    fn d_jumps_and_behaviour_at_infinity() {
        let s = surf();
        let geom = s.geometry().clone();
        for &x in &[-2.5, -0.4, 0.9, 2.6] {
            let sum = s.d_plus(x).unwrap() + s.d_minus(x).unwrap();
            assert!((sum + geom.weight_real(x).ln()).norm() < 1e-8);
        }
        for j in 0..2 {
            let x = geom.gap(j).mid();
            let jump = s.d_plus(x).unwrap() - s.d_minus(x).unwrap();
            assert!((jump - I * s.delta[j]).norm() < 1e-8);
        }
        // δ was chosen so that d stays bounded at infinity
        let big = s.d_function(C64::new(3e3, 2e3)).unwrap();
        assert!((big - s.d_infinity()).norm() < 1e-2);
        let z = C64::new(0.2, 0.9);
        let d1 = s.d_function(z).unwrap();
        let d2 = s.d_function(z.conj()).unwrap();
        assert!((d1.conj() - d2).norm() < 1e-12);
    }

    #[test]
    fn r_normalization() {
        let s = surf();
        let a = s.geometry().endpoints();
        let jset = s.j_indices();
        // z r(z) = 1 + c/z + O(z^-2) with c = -(Σ_J a_j - Σ_J' a_l)/4
        let c: f64 = -(0..a.len())
            .map(|l| if jset.contains(&l) { a[l] } else { -a[l] })
            .sum::<f64>()
            / 4.0;
        let z = C64::from(1e6);
        let zr = z * s.r_function(z);
        assert!((zr - 1.0).norm() < 2e-6);
        assert!((zr - 1.0 - c / z).norm() < 1e-11);
        let z = C64::new(0.3, -1.7);
        let r4 = s.r_function(z).norm().powi(4);
        let num: f64 = jset.iter().map(|&j| (z - a[j]).norm()).product();
        let den: f64 = (0..a.len())
            .filter(|l| !jset.contains(l))
            .map(|l| (z - a[l]).norm())
            .product();
        assert!((r4 * den - num).abs() < 1e-12 * num);
    }
}
