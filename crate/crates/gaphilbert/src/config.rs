//! Run configuration and the cached state shared by all experiments.

use serde::{Deserialize, Serialize};

use crate::asymptotics::Asymptotics;
use crate::geometry::{GapGeometry, MIN_ORDER};
use crate::sobolev::MAX_POSITIVE_ORDER;
use crate::spectral::SpectralDecomposition;
use crate::surface::SurfaceData;
use crate::theta::{find_kappa_tilde, DivisorScan, ThetaContext};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub endpoints: Vec<f64>,
    /// Cosine-rule order per segment for periods and Abel integrals.
    pub quad_order: usize,
    /// Nyström nodes per cut.
    pub nystrom_order: usize,
    pub theta_target: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub kappa_step: f64,
    pub eps_div: f64,
    /// Series truncation; defaults to the last resolved index.
    pub n_max: Option<usize>,
    /// Margin kept from I_e in the gaps.
    pub omega: f64,
    pub s1: usize,
    pub s2: usize,
    pub bump_width: f64,
    /// Minimum distance of a bump to I_i.
    pub bump_distance: f64,
    pub bumps_per_gap: usize,
    /// Distance of the contour γ from I_i.
    pub gamma_distance: f64,
    pub samples: usize,
    pub seed: u64,
    /// Continuation points per gap.
    pub points_per_gap: usize,
    pub phantom_degree: usize,
    pub recovery_n_max: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            endpoints: vec![-3.0, -2.0, -1.0, 1.0, 2.0, 3.0],
            quad_order: 64,
            nystrom_order: 128,
            theta_target: 1e-14,
            kappa_min: 0.0,
            kappa_max: 40.0,
            kappa_step: 0.02,
            eps_div: 1e-6,
            n_max: None,
            omega: 0.05,
            s1: 1,
            s2: 1,
            bump_width: 0.1,
            bump_distance: 0.1,
            bumps_per_gap: 40,
            gamma_distance: 0.01,
            samples: 100,
            seed: 1,
            points_per_gap: 5,
            phantom_degree: 0,
            recovery_n_max: 10,
        }
    }
}

impl RunConfig {
    pub fn geometry(&self) -> Result<GapGeometry> {
        GapGeometry::new(&self.endpoints)
    }

    pub fn validate(&self) -> Result<()> {
        let geom = self.geometry()?;
        for (name, order) in [("quad_order", self.quad_order), ("nystrom_order", self.nystrom_order)] {
            if order < MIN_ORDER {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {order} is below {MIN_ORDER}"
                )));
            }
        }
        let positive = [
            ("theta_target", self.theta_target),
            ("kappa_step", self.kappa_step),
            ("eps_div", self.eps_div),
            ("omega", self.omega),
            ("bump_width", self.bump_width),
            ("bump_distance", self.bump_distance),
            ("gamma_distance", self.gamma_distance),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.theta_target >= 1.0 || self.eps_div >= 1.0 {
            return Err(Error::InvalidArgument(
                "theta_target and eps_div must be below 1".into(),
            ));
        }
        if !(self.kappa_max > self.kappa_min) {
            return Err(Error::InvalidArgument(format!(
                "empty kappa window [{}, {}]",
                self.kappa_min, self.kappa_max
            )));
        }
        if self.s1 > MAX_POSITIVE_ORDER {
            return Err(Error::InvalidArgument(format!(
                "s1 = {} exceeds {MAX_POSITIVE_ORDER}",
                self.s1
            )));
        }
        if 2.0 * self.omega >= geom.min_gap() {
            return Err(Error::InvalidArgument(format!(
                "omega = {} leaves no room in the smallest gap",
                self.omega
            )));
        }
        if self.samples == 0 || self.points_per_gap == 0 || self.bumps_per_gap == 0 {
            return Err(Error::InvalidArgument(
                "samples, points_per_gap and bumps_per_gap must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Everything the experiments need, built once from a configuration.
#[derive(Debug, Clone)]
pub struct Lab {
    pub config: RunConfig,
    pub surface: SurfaceData,
    pub theta: ThetaContext,
    pub asymptotics: Asymptotics,
    pub spectrum: SpectralDecomposition,
    pub scan: DivisorScan,
}

impl Lab {
    pub fn build(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let geom = config.geometry()?;
        let surface = SurfaceData::build(&geom, config.quad_order)?;
        let theta = ThetaContext::from_surface(&surface, config.theta_target)?;
        let asymptotics = Asymptotics::new(&surface, &theta);
        let scan = find_kappa_tilde(
            &theta,
            asymptotics.line(),
            config.kappa_min,
            config.kappa_max,
            config.kappa_step,
            config.eps_div,
        )?;
        let spectrum = SpectralDecomposition::compute(&geom, config.nystrom_order)?;
        Ok(Self {
            config: config.clone(),
            surface,
            theta,
            asymptotics,
            spectrum,
            scan,
        })
    }

    pub fn geometry(&self) -> &GapGeometry {
        self.surface.geometry()
    }

    /// Configured n_max, capped at the last resolved index.
    pub fn n_max(&self) -> Result<usize> {
        let r = self.spectrum.resolved_count();
        if r == 0 {
            return Err(Error::BelowNoiseFloor { n: 0 });
        }
        Ok(self.config.n_max.unwrap_or(r - 1).min(r - 1))
    }

    /// `points_per_gap` points spread over the middle half of every gap.
    pub fn midgap_points(&self) -> Vec<f64> {
        let geom = self.geometry();
        let k = self.config.points_per_gap;
        (0..geom.genus())
            .flat_map(|j| {
                let gap = geom.gap(j);
                (0..k).map(move |i| {
                    let t = if k == 1 { 0.5 } else { 0.25 + 0.5 * i as f64 / (k - 1) as f64 };
                    gap.lo + gap.len() * t
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = RunConfig::default();
        c.endpoints = vec![-3.0, -2.0, -1.0, -1.5, 2.0, 3.0];
        assert!(matches!(c.validate(), Err(Error::NotIncreasing { i: 3, j: 4, .. })));
        let mut c = RunConfig::default();
        c.kappa_step = 0.0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.omega = 0.6;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.s1 = 7;
        assert!(c.validate().is_err());
    }
}
