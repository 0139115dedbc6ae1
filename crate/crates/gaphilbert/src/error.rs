use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("expected an even number of at least 6 endpoints (g >= 2), got {0}")]
    EndpointCount(usize),
    #[error("endpoint a_{0} is not finite")]
    NonFiniteEndpoint(usize),
    #[error("endpoints must be strictly increasing: a_{i} = {ai} is not below a_{j} = {aj}")]
    NotIncreasing { i: usize, ai: f64, j: usize, aj: f64 },
    #[error("quadrature order {0} is below the minimum {1}")]
    OrderTooLow(usize, usize),
    #[error("matrix A is numerically singular (condition number {0:.3e})")]
    SingularA(f64),
    #[error("Im tau is not positive definite (smallest eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),
    #[error("theta truncation radius {radius} cannot reach accuracy {target:.1e}")]
    ThetaTruncation { radius: usize, target: f64 },
    #[error("evaluation at the branch point {0}")]
    BranchPoint(f64),
    #[error("index {n} is below the spectral noise floor")]
    BelowNoiseFloor { n: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
