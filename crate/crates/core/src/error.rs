//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("pixel ({x}, {y}) outside image bounds {width}x{height}")]
    OutOfBounds {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },

    #[error("invalid camera: {0}")]
    InvalidCamera(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("predicted background required but missing or mismatched: {0}")]
    Background(String),

    #[error("optimization diverged at iteration {iteration} (loss = {loss})")]
    Diverged { iteration: usize, loss: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
