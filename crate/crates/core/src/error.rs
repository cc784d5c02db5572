//! Error types shared across the crate.
//!
//! `ConfigError` covers everything that makes an input unusable before any
//! computation starts: bad distribution parameters, malformed files,
//! unknown keys. `EvalError` covers comparisons that are undefined for the
//! given data, such as scoring two labelings over disjoint node sets.

use std::path::PathBuf;

use thiserror::Error;

/// A configuration or input file is invalid.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
}

impl ConfigError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ConfigError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        ConfigError::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// A comparison or score is undefined for the given inputs.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("labelings cover different item sets: {detail}")]
    ItemSetMismatch { detail: String },

    #[error("no items in common at t={t}, delta={delta}")]
    EmptyDomain { t: usize, delta: usize },

    #[error("nothing to compare: both labelings are empty")]
    EmptyComparison,

    #[error("timestep {t} with delta {delta} exceeds horizon {horizon}")]
    WindowOutOfRange {
        t: usize,
        delta: usize,
        horizon: usize,
    },

    #[error("invalid evaluation parameter: {0}")]
    InvalidParameter(String),

    #[error("event logs span different horizons: {left} vs {right}")]
    HorizonMismatch { left: usize, right: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },
}
