//! Nyström discretization of the operator coupling I_e and I_i, its singular
//! system, and analytic evaluation of the singular functions off I_e.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::geometry::{weight_from_offsets, weight_taylor, GapGeometry};
use crate::{Error, Result};

/// Eigenvalues below this multiple of λ_0 are not trusted.
pub const NOISE_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct NystromGrid {
    /// Interior nodes (I_i), ascending.
    pub xi: Vec<f64>,
    pub wi: Vec<f64>,
    /// w at interior nodes.
    pub ww_i: Vec<f64>,
    /// Exterior nodes (I_e), ascending.
    pub xe: Vec<f64>,
    pub we: Vec<f64>,
    pub ww_e: Vec<f64>,
    /// Interior cut index (1..g-1) of each interior node.
    pub cut_i: Vec<usize>,
    pub order: usize,
}

impl NystromGrid {
    pub fn new(geom: &GapGeometry, order: usize) -> Result<Self> {
        let rules = geom.build_rules(order)?;
        let g = geom.genus();
        let mut grid = Self {
            xi: vec![],
            wi: vec![],
            ww_i: vec![],
            xe: vec![],
            we: vec![],
            ww_e: vec![],
            cut_i: vec![],
            order,
        };
        for k in 0..=g {
            let r = &rules[2 * k];
            for i in 0..r.len() {
                let w = weight_from_offsets(&r.offsets[i]);
                if k == 0 || k == g {
                    grid.xe.push(r.nodes[i]);
                    grid.we.push(r.weights[i]);
                    grid.ww_e.push(w);
                } else {
                    grid.xi.push(r.nodes[i]);
                    grid.wi.push(r.weights[i]);
                    grid.ww_i.push(w);
                    grid.cut_i.push(k);
                }
            }
        }
        Ok(grid)
    }

    pub fn ni(&self) -> usize {
        self.xi.len()
    }

    pub fn ne(&self) -> usize {
        self.xe.len()
    }
}

/// The weighted block B_ij = sqrt(W_i) K(y_i, x_j) sqrt(W_j) with
/// K(y, x) = sqrt(w(y)) / (sqrt(w(x)) 2π (x - y)), y in I_i, x in I_e.
pub fn coupling_block(grid: &NystromGrid) -> DMatrix<f64> {
    let (ni, ne) = (grid.ni(), grid.ne());
    let cols: Vec<Vec<f64>> = (0..ne)
        .into_par_iter()
        .map(|j| {
            let x = grid.xe[j];
            let cx = grid.we[j].sqrt() / grid.ww_e[j].sqrt();
            (0..ni)
                .map(|i| {
                    grid.wi[i].sqrt() * grid.ww_i[i].sqrt() * cx
                        / (2.0 * PI * (x - grid.xi[i]))
                })
                .collect()
        })
        .collect();
    DMatrix::from_vec(ni, ne, cols.concat())
}

/// Symmetric embedding [[0, B], [B^T, 0]] of the discretized operator, interior
/// unknowns first.
pub fn build_khat(grid: &NystromGrid) -> DMatrix<f64> {
    let b = coupling_block(grid);
    let (ni, ne) = (grid.ni(), grid.ne());
    let mut m = DMatrix::zeros(ni + ne, ni + ne);
    m.view_mut((0, ni), (ni, ne)).copy_from(&b);
    m.view_mut((ni, 0), (ne, ni)).copy_from(&b.transpose());
    m
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    geom: GapGeometry,
    pub grid: NystromGrid,
    pub b: DMatrix<f64>,
    /// Positive eigenvalues λ_0 > λ_1 > ...
    pub lambda: Vec<f64>,
    /// Unit interior parts, one column per n.
    pub u: DMatrix<f64>,
    /// Unit exterior parts, one column per n.
    pub v: DMatrix<f64>,
    /// max_n |λ_n + (matching negative eigenvalue)|.
    pub pair_defect: f64,
    pub symmetry_defect: f64,
}

fn first_lobe_sign(u: &[f64]) -> f64 {
    let m = u.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    u.iter()
        .find(|x| x.abs() > 1e-3 * m)
        .map(|x| x.signum())
        .unwrap_or(1.0)
}

impl SpectralDecomposition {
    pub fn compute(geom: &GapGeometry, order: usize) -> Result<Self> {
        let grid = NystromGrid::new(geom, order)?;
        let m = build_khat(&grid);
        let symmetry_defect = (&m - m.transpose()).amax();
        let (ni, ne) = (grid.ni(), grid.ne());
        let b = m.view((0, ni), (ni, ne)).into_owned();
        let eig = SymmetricEigen::new(m);
        if eig.eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("non-finite eigenvalue".into()));
        }
        let mut idx: Vec<usize> = (0..ni + ne).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        let npos = ni.min(ne);
        let mut neg: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        neg.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let mut lambda = Vec::with_capacity(npos);
        let mut u = DMatrix::zeros(ni, npos);
        let mut v = DMatrix::zeros(ne, npos);
        let mut pair_defect: f64 = 0.0;
        for (n, &k) in idx.iter().take(npos).enumerate() {
            let lam = eig.eigenvalues[k];
            pair_defect = pair_defect.max((lam + neg[n]).abs());
            let col = eig.eigenvectors.column(k);
            let mut uc: Vec<f64> = col.rows(0, ni).iter().cloned().collect();
            let mut vc: Vec<f64> = col.rows(ni, ne).iter().cloned().collect();
            let nu = uc.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nv = vc.iter().map(|x| x * x).sum::<f64>().sqrt();
            let sgn = first_lobe_sign(&uc);
            uc.iter_mut().for_each(|x| *x *= sgn / nu);
            vc.iter_mut().for_each(|x| *x *= sgn / nv);
            lambda.push(lam);
            u.column_mut(n).copy_from_slice(&uc);
            v.column_mut(n).copy_from_slice(&vc);
        }
        Ok(Self {
            geom: geom.clone(),
            grid,
            b,
            lambda,
            u,
            v,
            pair_defect,
            symmetry_defect,
        })
    }

    pub fn geometry(&self) -> &GapGeometry {
        &self.geom
    }

    pub fn kappa(&self, n: usize) -> f64 {
        -self.lambda[n].ln()
    }

    pub fn kappas(&self, count: usize) -> Vec<f64> {
        (0..count.min(self.lambda.len())).map(|n| self.kappa(n)).collect()
    }

    pub fn is_resolved(&self, n: usize) -> bool {
        n < self.lambda.len() && self.lambda[n] >= NOISE_FLOOR * self.lambda[0]
    }

    /// Number of leading indices above the noise floor.
    pub fn resolved_count(&self) -> usize {
        (0..self.lambda.len())
            .take_while(|&n| self.is_resolved(n))
            .count()
    }

    /// Singular values of B, the dual route to `lambda`.
    pub fn svd_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.b.clone().svd(false, false).singular_values.iter().cloned().collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    }

    /// Im f̂_n at the interior nodes (f̂_n is purely imaginary on I_i).
    pub fn f_hat(&self, n: usize) -> Vec<f64> {
        (0..self.grid.ni())
            .map(|i| self.u[(i, n)] / self.grid.wi[i].sqrt())
            .collect()
    }

    /// ĥ_n at the exterior nodes.
    pub fn h_hat(&self, n: usize) -> Vec<f64> {
        (0..self.grid.ne())
            .map(|i| -self.v[(i, n)] / self.grid.we[i].sqrt())
            .collect()
    }

    /// Weighted singular function f_n = sqrt(w) Im f̂_n at the interior nodes.
    pub fn f_weighted_nodes(&self, n: usize) -> Vec<f64> {
        (0..self.grid.ni())
            .map(|i| self.grid.ww_i[i].sqrt() * self.u[(i, n)] / self.grid.wi[i].sqrt())
            .collect()
    }

    pub fn sign_changes(&self, n: usize) -> usize {
        let col: Vec<f64> = self.u.column(n).iter().cloned().collect();
        let m = col.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let mut last = 0.0;
        let mut count = 0;
        for &x in &col {
            if x.abs() < 1e-8 * m {
                continue;
            }
            if last != 0.0 && x.signum() != last {
                count += 1;
            }
            last = x.signum();
        }
        count
    }

    /// ‖B^T u_n - λ_n v_n‖.
    pub fn block_residual(&self, n: usize) -> f64 {
        let r = self.b.transpose() * self.u.column(n) - self.v.column(n) * self.lambda[n];
        r.norm()
    }

    /// ‖B B^T u_n - λ_n² u_n‖, the composed relation on I_i.
    pub fn composed_residual(&self, n: usize) -> f64 {
        let bu = self.b.transpose() * self.u.column(n);
        let r = &self.b * bu - self.u.column(n) * (self.lambda[n] * self.lambda[n]);
        r.norm()
    }

    /// max |G - Id| for the Gram matrix of f̂_0..f̂_{count-1} in L²(I_i).
    pub fn orthonormality_defect(&self, count: usize) -> f64 {
        let uc = self.u.columns(0, count);
        let gm = uc.transpose() * uc;
        (gm - DMatrix::identity(count, count)).amax()
    }

    /// Hilbert–Schmidt norm squared, Σ λ_n² over both signs.
    pub fn hilbert_schmidt(&self) -> f64 {
        2.0 * self.lambda.iter().map(|x| x * x).sum::<f64>()
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if !self.is_resolved(n) {
            return Err(Error::BelowNoiseFloor { n });
        }
        Ok(())
    }

    fn on_exterior(&self, z: C64) -> bool {
        if z.im != 0.0 {
            return false;
        }
        self.geom
            .exterior_cuts()
            .iter()
            .any(|c| z.re >= c.lo && z.re <= c.hi)
    }

    // c_e = W_e ĥ_e / sqrt(w(x_e))
    fn cauchy_coeffs(&self, n: usize) -> Vec<f64> {
        let h = self.h_hat(n);
        (0..self.grid.ne())
            .map(|e| self.grid.we[e] * h[e] / self.grid.ww_e[e].sqrt())
            .collect()
    }

    /// f_n(z) = -(w(z) / (2π λ_n)) ∫_{I_e} ĥ_n(x) / (sqrt(w(x)) (x - z)) dx,
    /// the weighted singular function continued off I_e.
    pub fn f_weighted(&self, n: usize, z: C64) -> Result<C64> {
        self.check_index(n)?;
        if self.on_exterior(z) {
            return Err(Error::InvalidArgument(format!("z = {z} lies on I_e")));
        }
        let c = self.cauchy_coeffs(n);
        let s: C64 = (0..self.grid.ne()).map(|e| c[e] / (self.grid.xe[e] - z)).sum();
        Ok(-self.geom.weight(z) * s / (2.0 * PI * self.lambda[n]))
    }

    /// f_n at many real points off I_e.
    pub fn f_weighted_real(&self, n: usize, xs: &[f64]) -> Result<Vec<f64>> {
        self.check_index(n)?;
        let c = self.cauchy_coeffs(n);
        let scale = -1.0 / (2.0 * PI * self.lambda[n]);
        xs.iter()
            .map(|&x| {
                if self.on_exterior(C64::from(x)) {
                    return Err(Error::InvalidArgument(format!("x = {x} lies on I_e")));
                }
                let s: f64 = (0..self.grid.ne()).map(|e| c[e] / (self.grid.xe[e] - x)).sum();
                Ok(scale * self.geom.weight_real(x) * s)
            })
            .collect()
    }

    /// f̂_n(z) = i f_n(z) / sqrt(w(z)).
    pub fn f_hat_at(&self, n: usize, z: C64) -> Result<C64> {
        let f = self.f_weighted(n, z)?;
        Ok(C64::new(0.0, 1.0) * f / self.geom.weight(z).sqrt())
    }

    /// Derivatives f_n^{(k)}(x), k = 0..=order, at real x off I_e, by
    /// differentiating the Cauchy kernel and the Taylor jet of w.
    pub fn f_weighted_derivs(&self, n: usize, x: f64, order: usize) -> Result<Vec<f64>> {
        self.check_index(n)?;
        if self.on_exterior(C64::from(x)) || x <= self.geom.first() || x >= self.geom.last() {
            return Err(Error::InvalidArgument(format!("x = {x} lies on I_e")));
        }
        let c = self.cauchy_coeffs(n);
        // Taylor coefficients of S(t) = Σ c_e / (x_e - t) about x
        let mut s = vec![0.0; order + 1];
        for e in 0..self.grid.ne() {
            let inv = 1.0 / (self.grid.xe[e] - x);
            let mut p = c[e] * inv;
            for sk in s.iter_mut() {
                *sk += p;
                p *= inv;
            }
        }
        let w = weight_taylor(self.geom.first(), self.geom.last(), x, order);
        let scale = -1.0 / (2.0 * PI * self.lambda[n]);
        let mut fact = 1.0;
        Ok((0..=order)
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                let coef: f64 = (0..=k).map(|j| w[j] * s[k - j]).sum();
                scale * coef * fact
            })
            .collect())
    }
}
