//! Spectral numerics for the finite Hilbert transform on a union of intervals
//! with gaps.
//!
//! The crate computes the singular system of the truncated Hilbert transform
//! by a Nyström discretization, the hyperelliptic data (periods, Abel map,
//! theta functions) that governs its asymptotics, the series continuation of
//! interior data into the gaps, and the instability and weighted stability of
//! that continuation.

pub mod acceptance;
pub mod asymptotics;
pub mod config;
pub mod continuation;
pub mod error;
pub mod geometry;
pub mod quad;
pub mod sobolev;
pub mod spectral;
pub mod surface;
pub mod theta;

pub use config::{Lab, RunConfig};
pub use error::{Error, Result};
pub use geometry::GapGeometry;
pub use spectral::SpectralDecomposition;
pub use surface::SurfaceData;
pub use theta::{KappaLine, ThetaContext};
