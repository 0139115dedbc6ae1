//! Endpoint configuration, the weight w and the radical R.

use num_complex::Complex64 as C64;

use crate::quad::{self, SegmentRule};
use crate::{Error, Result};

/// Smallest accepted quadrature order.
pub const MIN_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    ExteriorCut,
    InteriorCut,
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_cut(&self) -> bool {
        self.kind != SegmentKind::Gap
    }
}

/// Ordered endpoints a_1 < ... < a_{2g+2}.
///
/// Segment `k` is [a_{k+1}, a_{k+2}] (zero based). Even segments are cuts,
/// odd segments are gaps. Cut 0 and cut g form I_e, cuts 1..g-1 form I_i.
#[derive(Debug, Clone, PartialEq)]
pub struct GapGeometry {
    a: Vec<f64>,
    genus: usize,
}

impl GapGeometry {
    pub fn new(endpoints: &[f64]) -> Result<Self> {
        let m = endpoints.len();
        if m < 6 || !m.is_multiple_of(2) {
            return Err(Error::EndpointCount(m));
        }
        for (i, x) in endpoints.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFiniteEndpoint(i + 1));
            }
        }
        for i in 0..m - 1 {
            if endpoints[i] >= endpoints[i + 1] {
                return Err(Error::NotIncreasing {
                    i: i + 1,
                    ai: endpoints[i],
                    j: i + 2,
                    aj: endpoints[i + 1],
                });
            }
        }
        Ok(Self {
            a: endpoints.to_vec(),
            genus: m / 2 - 1,
        })
    }

    /// a = (-3, -2, -1, 1, 2, 3), g = 2.
    pub fn reference() -> Self {
        Self::new(&[-3.0, -2.0, -1.0, 1.0, 2.0, 3.0]).unwrap()
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn endpoints(&self) -> &[f64] {
        &self.a
    }

    pub fn first(&self) -> f64 {
        self.a[0]
    }

    pub fn last(&self) -> f64 {
        self.a[self.a.len() - 1]
    }

    pub fn num_segments(&self) -> usize {
        self.a.len() - 1
    }

    pub fn segment(&self, k: usize) -> Segment {
        let kind = if k % 2 == 1 {
            SegmentKind::Gap
        } else if k == 0 || k == 2 * self.genus {
            SegmentKind::ExteriorCut
        } else {
            SegmentKind::InteriorCut
        };
        Segment {
            index: k,
            lo: self.a[k],
            hi: self.a[k + 1],
            kind,
        }
    }

    pub fn segments(&self) -> Vec<Segment> {
        (0..self.num_segments()).map(|k| self.segment(k)).collect()
    }

    /// Cut `k` for k = 0..=g.
    pub fn cut(&self, k: usize) -> Segment {
        self.segment(2 * k)
    }

    /// Gap `j` for j = 0..g.
    pub fn gap(&self, j: usize) -> Segment {
        self.segment(2 * j + 1)
    }

    pub fn interior_cuts(&self) -> Vec<Segment> {
        (1..self.genus).map(|k| self.cut(k)).collect()
    }

    pub fn exterior_cuts(&self) -> [Segment; 2] {
        [self.cut(0), self.cut(self.genus)]
    }

    pub fn min_gap(&self) -> f64 {
        (0..self.genus)
            .map(|j| self.gap(j).len())
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the segment with lo <= x <= hi.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if x < self.first() || x > self.last() {
            return None;
        }
        Some((0..self.num_segments()).find(|&k| x <= self.a[k + 1]).unwrap())
    }

    pub fn is_branch_point(&self, z: C64) -> bool {
        z.im == 0.0 && self.a.contains(&z.re)
    }

    pub fn offsets(&self, x: f64) -> Vec<f64> {
        self.a.iter().map(|aj| x - aj).collect()
    }

    /// w(z) = sqrt(a_{2g+2} - z) sqrt(z - a_1), principal branches.
    pub fn weight(&self, z: C64) -> C64 {
        (C64::from(self.last()) - z).sqrt() * (z - self.first()).sqrt()
    }

    /// w on the real axis; zero outside (a_1, a_{2g+2}).
    pub fn weight_real(&self, x: f64) -> f64 {
        if x <= self.first() || x >= self.last() {
            0.0
        } else {
            ((self.last() - x) * (x - self.first())).sqrt()
        }
    }

    /// R(z) with R(z) ~ z^{g+1} at infinity, analytic off the cuts.
    ///
    /// Pairing the principal roots cut by cut puts every branch line on a cut.
    /// At a branch point the value is 0.
    pub fn radical(&self, z: C64) -> C64 {
        let mut out = C64::from(1.0);
        for k in 0..=self.genus {
            out *= (z - self.a[2 * k]).sqrt() * (z - self.a[2 * k + 1]).sqrt();
        }
        out
    }

    /// Boundary value of R from the upper half plane at real x.
    pub fn radical_plus(&self, x: f64) -> C64 {
        radical_plus_from_offsets(&self.offsets(x))
    }

    pub fn radical_minus(&self, x: f64) -> C64 {
        self.radical_plus(x).conj()
    }

    /// One cosine rule per segment, cuts and gaps alike.
    pub fn build_rules(&self, order: usize) -> Result<Vec<SegmentRule>> {
        if order < MIN_ORDER {
            return Err(Error::OrderTooLow(order, MIN_ORDER));
        }
        Ok((0..self.num_segments())
            .map(|k| self.cosine_rule(k, order))
            .collect())
    }

    pub fn cosine_rule(&self, k: usize, order: usize) -> SegmentRule {
        quad::cosine_rule(&self.a, k, order, None)
    }

    /// Cosine rule on [lo_k, x_end] of segment `k`.
    pub fn partial_rule(&self, k: usize, x_end: f64, order: usize) -> SegmentRule {
        quad::cosine_rule(&self.a, k, order, Some(x_end))
    }

    pub fn sigmoidal_rule(&self, k: usize, order: usize) -> SegmentRule {
        quad::sigmoidal_rule(&self.a, k, order, 6)
    }
}

/// Taylor coefficients w_0..w_order of w about real x in (a_1, a_2g+2).
///
/// Uses the power recursion for q^{1/2} with q = (a_2g+2 - x)(x - a_1).
pub fn weight_taylor(first: f64, last: f64, x: f64, order: usize) -> Vec<f64> {
    let q = [(last - x) * (x - first), first + last - 2.0 * x, -1.0];
    let alpha = 0.5;
    let mut f = vec![0.0; order + 1];
    f[0] = q[0].sqrt();
    for k in 1..=order {
        let mut s = 0.0;
        for j in 1..=k.min(2) {
            s += ((alpha + 1.0) * j as f64 - k as f64) * q[j] * f[k - j];
        }
        f[k] = s / (k as f64 * q[0]);
    }
    f
}

/// sqrt(t) for t >= 0, i sqrt(|t|) for t < 0: the upper boundary value of the
/// principal root.
pub fn sqrt_plus(t: f64) -> C64 {
    if t >= 0.0 {
        C64::new(t.sqrt(), 0.0)
    } else {
        C64::new(0.0, (-t).sqrt())
    }
}

pub fn radical_plus_from_offsets(d: &[f64]) -> C64 {
    d.iter().fold(C64::from(1.0), |acc, &t| acc * sqrt_plus(t))
}

/// w from offsets to a_1 and a_{2g+2}.
pub fn weight_from_offsets(d: &[f64]) -> f64 {
    (-d[d.len() - 1] * d[0]).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_endpoints() {
        assert!(matches!(
            GapGeometry::new(&[-3.0, -2.0, -1.0, 1.0]),
            Err(Error::EndpointCount(4))
        ));
        match GapGeometry::new(&[-3.0, -2.0, -1.0, -1.5, 2.0, 3.0]) {
            Err(Error::NotIncreasing { i, j, .. }) => assert_eq!((i, j), (3, 4)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(GapGeometry::new(&[-3.0, -2.0, f64::NAN, 1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn segment_tags_alternate() {
        let g = GapGeometry::new(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).unwrap();
        let kinds: Vec<_> = g.segments().iter().map(|s| s.kind).collect();
        use SegmentKind::*;
        assert_eq!(
            kinds,
            vec![ExteriorCut, Gap, InteriorCut, Gap, InteriorCut, Gap, ExteriorCut]
        );
        assert_eq!(g.genus(), 3);
        assert_eq!(g.interior_cuts().len(), 2);
    }

    #[test]
    fn weight_values() {
        let g = GapGeometry::reference();
        assert!((g.weight(C64::from(0.0)) - 3.0).norm() < 1e-15);
        assert_eq!(g.weight(C64::from(-3.0)).norm(), 0.0);
        let expect = ((3.0 - 0.5) * (0.5 + 3.0_f64)).sqrt();
        assert!((g.weight(C64::from(0.5)).re - expect).abs() < 1e-15);
        assert_eq!(g.weight_real(3.5), 0.0);
    }

    #[test]
    fn weight_taylor_matches_finite_differences() {
        let c = weight_taylor(-3.0, 3.0, 0.7, 3);
        let w = |x: f64| ((3.0 - x) * (x + 3.0)).sqrt();
        let h = 1e-3;
        let d1 = (w(0.7 + h) - w(0.7 - h)) / (2.0 * h);
        let d2 = (w(0.7 + h) - 2.0 * w(0.7) + w(0.7 - h)) / (h * h);
        assert!((c[0] - w(0.7)).abs() < 1e-15);
        assert!((c[1] - d1).abs() < 1e-6);
        assert!((2.0 * c[2] - d2).abs() < 1e-5);
    }

    #[test]
    fn radical_normalized_at_infinity() {
        let g = GapGeometry::reference();
        let z = C64::from(1e6);
        assert!((g.radical(z) / z.powi(3) - 1.0).norm() < 1e-9);
        let z = C64::new(-2e5, 3e5);
        assert!((g.radical(z) / z.powi(3) - 1.0).norm() < 1e-9);
    }

    #[test]
    fn radical_jump_and_symmetry() {
        let g = GapGeometry::reference();
        let x = -2.5;
        assert!((g.radical_plus(x) + g.radical_minus(x)).norm() < 1e-15);
        assert!(g.radical_plus(x).re.abs() < 1e-15);
        // the principal-root pairing reproduces the boundary value from above
        let eps = 1e-12;
        assert!((g.radical(C64::new(x, eps)) - g.radical_plus(x)).norm() < 1e-9);
        let z = C64::new(0.3, 0.7);
        assert!((g.radical(z.conj()) - g.radical(z).conj()).norm() < 1e-14);
    }
}
