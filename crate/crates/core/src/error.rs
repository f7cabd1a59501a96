//! Library-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("Artin ring mismatch (N = {left} vs N = {right})")]
    RingMismatch { left: usize, right: usize },

    #[error("element is not a unit (constant term vanishes)")]
    NotAUnit,

    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: i64, got: i64 },

    #[error("cap exceeded: {0}")]
    CapExceeded(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no solution: {0}")]
    NoSolution(String),
}
