use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("labeling {labeling} is not defined for {bits} bits per symbol")]
    InvalidLabeling { labeling: String, bits: usize },
    #[error("operation requires 4-PAM (m = 2), got m = {0}")]
    RequiresFourPam(usize),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("noise standard deviation must be positive and finite, got {0}")]
    InvalidNoise(f64),
    #[error("channel gain must be positive and finite, got {0}")]
    InvalidGain(f64),
    #[error("symbols must differ")]
    IdenticalSymbols,
    #[error("codeword pair must differ in at least one position")]
    IdenticalCodewords,
    #[error("enumeration limit exceeded: {what} = {value} > {limit}")]
    LimitExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("grid mismatch between results")]
    GridMismatch,
    #[error("output error: {0}")]
    Output(String),
}
