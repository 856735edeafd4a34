//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A named input field failed validation.
    #[error("invalid {field}: {reason}")]
    InvalidField { field: &'static str, reason: String },

    /// An operation that needs at least one value received an empty prefix.
    #[error("empty prefix: {op} requires at least one value")]
    EmptyPrefix { op: &'static str },

    /// A prefix value was not finite (NaN or infinity).
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    /// Star discrepancy is defined for values in [0, 1) only.
    #[error(
        "value {value} at index {index} lies outside [0, 1); apply fractional_parts first"
    )]
    OutOfUnitInterval { index: usize, value: f64 },

    /// A cylinder-event index exceeds the materialized schedule range.
    #[error("event index {index} exceeds schedule n_max {n_max}")]
    IndexOutOfSchedule { index: u32, n_max: u32 },

    /// Experiment dispatch received a name outside the known set.
    #[error("unknown experiment {name:?}; valid names: {}", valid.join(", "))]
    UnknownExperiment { name: String, valid: Vec<&'static str> },

    /// A test-function bank id did not resolve.
    #[error("unknown test function {id:?}; valid ids: {}", valid.join(", "))]
    UnknownTestFunction { id: String, valid: Vec<String> },

    /// JSON (de)serialization failed.
    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field,
            reason: reason.into(),
        }
    }
}
