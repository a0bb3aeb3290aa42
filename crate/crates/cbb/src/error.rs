//! Error type shared across the crate.

use thiserror::Error;

/// Errors returned by model construction, parsing, decomposition, and solving.
#[derive(Debug, Error)]
pub enum Error {
    /// A model or argument violates a structural precondition.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A spin or variable index is out of range.
    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    /// Text input could not be parsed; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An exact enumeration or dense reference path was asked to exceed its size cap.
    #[error("size {n} exceeds the cap of {cap} for {what}")]
    TooLarge { what: &'static str, n: usize, cap: usize },

    /// A run parameter is out of its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// A certificate does not match the instance it is checked against.
    #[error("certificate digest does not match the instance")]
    DigestMismatch,

    /// Inputs that must agree with each other do not.
    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
