use thiserror::Error;

/// Failures raised by oracles, samplers, integrators, solvers and certificates.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {0} lies outside the function domain")]
    DomainViolation(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite coordinate in point")]
    NonFinite,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("premise could not be verified: {0}")]
    UnverifiedPremise(String),
    #[error("sequence must be strictly positive (value {value} at index {index})")]
    NonPositiveSequence { index: usize, value: f64 },
    #[error("domain sampling failed after {0} consecutive rejections")]
    DomainSamplingFailure(usize),
    #[error("a known minimizer is required")]
    MissingMinimizer,
    #[error("state left the domain at t = {0}")]
    DomainExit(f64),
    #[error("numerical blow-up at t = {0}")]
    NumericalBlowup(f64),
    #[error("parameter window violated: {0}")]
    ParameterWindowViolation(String),
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("no decrease over {0} consecutive iterations")]
    StagnationFailure(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
