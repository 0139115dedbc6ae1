//! Gauss–Legendre based rules on the real segments of the geometry.
//!
//! Every rule keeps, for each node, the exact offsets `x - a_j` to all
//! endpoints. Products of square roots are evaluated from these offsets so
//! nodes that sit within rounding distance of an endpoint never collapse onto it.

use gauss_quad::legendre::GaussLegendre;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1], ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let n = n.max(2);
    let rule = GaussLegendre::new(n).expect("degree >= 2");
    let mut pairs: Vec<(f64, f64)> = rule.into_node_weight_pairs();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Plain Gauss–Legendre rule on [lo, hi].
pub fn gauss_rule(lo: f64, hi: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_legendre(n);
    let c = 0.5 * (lo + hi);
    let r = 0.5 * (hi - lo);
    (
        t.iter().map(|&s| c + r * s).collect(),
        w.iter().map(|&s| r * s).collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substitution {
    /// x = c - r cos(theta), absorbs inverse square roots at both ends.
    Cosine,
    /// Kress sigmoidal map, absorbs algebraic and logarithmic end behaviour.
    Sigmoidal,
}

#[derive(Debug, Clone)]
pub struct SegmentRule {
    pub segment: usize,
    pub substitution: Substitution,
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `offsets[i][j] = nodes[i] - a[j]`, computed without cancellation.
    pub offsets: Vec<Vec<f64>>,
}

impl SegmentRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(usize, f64) -> f64>(&self, mut f: F) -> f64 {
        self.weights
            .iter()
            .zip(&self.nodes)
            .enumerate()
            .map(|(i, (w, &x))| w * f(i, x))
            .sum()
    }
}

// Offsets from a node at distance `u` above a[k] and `v` below a[k+1].
fn offsets_for(a: &[f64], k: usize, u: f64, v: f64) -> Vec<f64> {
    a.iter()
        .enumerate()
        .map(|(j, &aj)| {
            if j == k {
                u
            } else if j == k + 1 {
                -v
            } else if j < k {
                (a[k] - aj) + u
            } else {
                (a[k + 1] - aj) - v
            }
        })
        .collect()
}

/// Cosine rule on segment [a[k], a[k+1]], optionally truncated at `x_end`.
pub(crate) fn cosine_rule(a: &[f64], k: usize, n: usize, x_end: Option<f64>) -> SegmentRule {
    let lo = a[k];
    let hi = a[k + 1];
    let r = 0.5 * (hi - lo);
    let theta_end = match x_end {
        None => std::f64::consts::PI,
        Some(x) => {
            let s = ((x - lo) / (2.0 * r)).clamp(0.0, 1.0);
            2.0 * s.sqrt().asin()
        }
    };
    let (t, wt) = gauss_legendre(n);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut offsets = Vec::with_capacity(n);
    for (ti, wi) in t.iter().zip(&wt) {
        let th = 0.5 * (ti + 1.0) * theta_end;
        let sh = (0.5 * th).sin();
        let ch = (0.5 * th).cos();
        let u = 2.0 * r * sh * sh;
        let v = 2.0 * r * ch * ch;
        nodes.push(if u < v { lo + u } else { hi - v });
        weights.push(0.5 * theta_end * wi * r * th.sin());
        offsets.push(offsets_for(a, k, u, v));
    }
    SegmentRule {
        segment: k,
        substitution: Substitution::Cosine,
        order: n,
        nodes,
        weights,
        offsets,
    }
}

/// Sigmoidal rule of exponent `p` on segment [a[k], a[k+1]].
pub(crate) fn sigmoidal_rule(a: &[f64], k: usize, n: usize, p: i32) -> SegmentRule {
    let lo = a[k];
    let hi = a[k + 1];
    let len = hi - lo;
    let (t, wt) = gauss_legendre(n);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut offsets = Vec::with_capacity(n);
    let pf = p as f64;
    for (ti, wi) in t.iter().zip(&wt) {
        let s = 0.5 * (ti + 1.0);
        let sp = s.powi(p);
        let cp = (1.0 - s).powi(p);
        let den = sp + cp;
        let u = len * sp / den;
        let v = len * cp / den;
        let du = pf * s.powi(p - 1) * (1.0 - s).powi(p - 1) / (den * den);
        nodes.push(if u < v { lo + u } else { hi - v });
        weights.push(0.5 * wi * len * du);
        offsets.push(offsets_for(a, k, u, v));
    }
    SegmentRule {
        segment: k,
        substitution: Substitution::Sigmoidal,
        order: n,
        nodes,
        weights,
        offsets,
    }
}
