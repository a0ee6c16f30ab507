//! Error type shared by all modules.

use core::fmt;

/// Errors reported by statistic, resampling and simulation routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Error {
    /// Fewer observations than the operation needs.
    InsufficientData { needed: usize, got: usize },
    /// Fewer bootstrap replicates than the operation needs.
    InsufficientReplicates { needed: usize, got: usize },
    /// An input value was NaN or infinite.
    NonFiniteInput,
    /// A scalar parameter was outside its admissible range.
    InvalidParameter(&'static str),
    /// Block length incompatible with the series length.
    InvalidBlockLength { block_length: usize, limit: usize },
    /// Autocovariance lag at or beyond the series length.
    InvalidLag { lag: usize, len: usize },
    /// Nonpositive scale where a positive one is required.
    InvalidScale,
    /// AR(1) coefficient with |phi| >= 1.
    NonStationary { phi: f64 },
    /// Structurally invalid configuration (matrices, grids, subsample sizes).
    InvalidConfig(&'static str),
    /// An operation received an empty collection.
    EmptyInput,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Error::InsufficientData { needed, got } => {
                write!(
                    f,
                    "insufficient data: need at least {needed} observations, got {got}"
                )
            }
            Error::InsufficientReplicates { needed, got } => {
                write!(
                    f,
                    "insufficient replicates: need at least {needed}, got {got}"
                )
            }
            Error::NonFiniteInput => write!(f, "input contains a NaN or infinite value"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::InvalidBlockLength {
                block_length,
                limit,
            } => {
                write!(
                    f,
                    "invalid block length {block_length}: must be in 1..={limit}"
                )
            }
            Error::InvalidLag { lag, len } => {
                write!(f, "invalid lag {lag} for a series of length {len}")
            }
            Error::InvalidScale => write!(f, "scale must be positive and finite"),
            Error::NonStationary { phi } => {
                write!(
                    f,
                    "AR(1) coefficient phi = {phi} is not stationary (|phi| < 1 required)"
                )
            }
            Error::InvalidConfig(reason) => write!(f, "invalid configuration: {reason}"),
            Error::EmptyInput => write!(f, "empty input"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
