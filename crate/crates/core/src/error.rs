//! Error type shared by all library modules.

use thiserror::Error;

/// Errors produced by layout construction, circuit building, parsing,
/// simulation, decoding, and analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// Code distance must be an odd integer >= 3.
    #[error("invalid distance {0}: must be odd and >= 3")]
    InvalidDistance(u32),

    /// A probability parameter fell outside [0, 1).
    #[error("invalid probability {value} for {name}: must lie in [0, 1)")]
    InvalidProbability { name: &'static str, value: f64 },

    /// A count or size parameter was out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Text-format parse failure with source location.
    #[error("parse error at line {line}: {msg} (token `{token}`)")]
    Parse {
        line: usize,
        token: String,
        msg: String,
    },

    /// A structural invariant was violated (indicates a construction bug).
    #[error("validation failure: {0}")]
    Validation(String),

    /// An exhaustive search or dense simulation exceeded its size budget.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// Input dimensions do not match (batch vs graph, etc).
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A fit or extrapolation cannot proceed on this data.
    #[error("analysis error: {0}")]
    Analysis(String),
}

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
