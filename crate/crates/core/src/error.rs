use thiserror::Error;

use crate::convexity::ConvexityClass;

/// Errors produced while validating inputs or evaluating a bound.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {value} is outside [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("invalid function spec: {0}")]
    InvalidSpec(String),

    #[error("class {class} is not supported for this function: {reason}")]
    UnsupportedClass {
        class: ConvexityClass,
        reason: String,
    },

    /// `index` is 1-based, matching the usual statement of the prefix-sum conditions.
    #[error("invalid weights at j={index}: {reason}")]
    InvalidWeights { index: usize, reason: String },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("zero denominator: q_{index} = 0")]
    ZeroDenominator { index: usize },

    #[error("degenerate q: interior prefix sum at i={index} equals {value} (must lie strictly inside (0, 1))")]
    DegenerateQ { index: usize, value: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("bad lambda at i={index}: {value} is outside [0, 1]")]
    BadLambda { index: usize, value: f64 },

    #[error("input is not sorted nondecreasingly at i={index}")]
    UnsortedInput { index: usize },

    #[error("no insertion point for {value} in the sorted tuple")]
    NoInsertionPoint { value: f64 },

    #[error("independent recomputation disagrees with the report for {what}: {reported} vs {recomputed}")]
    OracleMismatch {
        what: String,
        reported: f64,
        recomputed: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
