use std::fmt;

use serde::Serialize;
use sqcflow_core::Error as CoreError;
use thiserror::Error;

/// Process exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitStatus {
    Pass,
    CertificateFailure,
    Usage,
    Numerical,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::CertificateFailure => 1,
            Self::Usage => 2,
            Self::Numerical => 3,
        }
    }
}

impl fmt::Display for ExitStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub fn status(&self) -> ExitStatus {
        match self {
            Self::Core(e) => match e {
                CoreError::DomainExit(_)
                | CoreError::NumericalBlowup(_)
                | CoreError::NonFinite
                | CoreError::StagnationFailure(_)
                | CoreError::DomainSamplingFailure(_)
                | CoreError::InsufficientSamples(_)
                | CoreError::NonPositiveSequence { .. } => ExitStatus::Numerical,
                _ => ExitStatus::Usage,
            },
            _ => ExitStatus::Usage,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Self::Usage(_) => "usage",
            Self::Core(e) => match e {
                CoreError::DomainViolation(_) => "domain_violation",
                CoreError::DimensionMismatch { .. } => "dimension_mismatch",
                CoreError::NonFinite => "non_finite",
                CoreError::InvalidParameter(_) => "invalid_parameter",
                CoreError::UnverifiedPremise(_) => "unverified_premise",
                CoreError::NonPositiveSequence { .. } => "non_positive_sequence",
                CoreError::DomainSamplingFailure(_) => "domain_sampling_failure",
                CoreError::MissingMinimizer => "missing_minimizer",
                CoreError::DomainExit(_) => "domain_exit",
                CoreError::NumericalBlowup(_) => "numerical_blowup",
                CoreError::ParameterWindowViolation(_) => "parameter_window_violation",
                CoreError::InsufficientSamples(_) => "insufficient_samples",
                CoreError::StagnationFailure(_) => "stagnation_failure",
            },
            Self::Io(_) => "io",
            Self::Json(_) => "json",
            Self::Csv(_) => "csv",
        }
    }

    /// One-line JSON for standard error.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.status().code(),
        })
        .to_string()
    }
}

pub type CliResult<T> = Result<T, CliError>;
