use thiserror::Error;

use crate::event::Violation;

#[derive(Debug, Error)]
pub enum CarpError {
    #[error("invalid event history: {}", format_violations(.0))]
    InvalidHistory(Vec<Violation>),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("matrix is singular or not positive definite: {0}")]
    Singular(String),

    #[error("deep-tail conditioning: survival probability {survival:e} at age {age:?}")]
    DeepTail { survival: f64, age: [f64; 2] },

    #[error("conditional sampling failed after {attempts} attempts at age {age:?}")]
    SamplingFailed { attempts: usize, age: [f64; 2] },

    #[error("all {} optimizer starts failed: {}", .0.len(), .0.join("; "))]
    FitFailed(Vec<String>),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CarpError {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            CarpError::InvalidHistory(_) => "invalid_history",
            CarpError::InvalidParameter { .. } => "invalid_parameter",
            CarpError::Domain(_) => "domain",
            CarpError::Singular(_) => "singular",
            CarpError::DeepTail { .. } => "deep_tail",
            CarpError::SamplingFailed { .. } => "sampling_failed",
            CarpError::FitFailed(_) => "fit_failed",
            CarpError::Parse { .. } => "parse",
            CarpError::Config(_) => "config",
            CarpError::Io(_) => "io",
            CarpError::Csv(_) => "csv",
            CarpError::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, CarpError>;

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> CarpError {
    CarpError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
