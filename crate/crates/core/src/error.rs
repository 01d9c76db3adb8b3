use thiserror::Error;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("slot {slot} out of range for rank-{rank} tensor")]
    SlotOutOfRange { slot: usize, rank: usize },

    #[error("cannot contract slots {a} and {b}: {reason}")]
    BadContraction { a: usize, b: usize, reason: &'static str },

    #[error("metric is not symmetric positive definite: {0}")]
    BadMetric(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("point {point:?} lies outside the chart domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("finite-difference stencil leaves the chart domain at {point:?}")]
    StencilOutOfDomain { point: Vec<f64> },

    #[error("non-finite value encountered at {point:?}")]
    NonFinite { point: Vec<f64> },

    #[error("frame is singular at {point:?} (condition number {condition:.3e})")]
    SingularFrame { point: Vec<f64>, condition: f64 },

    #[error("constant matrix is singular")]
    SingularMatrix,

    #[error("unknown frame '{name}'; available: {available}")]
    UnknownFrame { name: String, available: String },

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("unknown identifier '{name}' at line {line}, column {column}")]
    UnknownIdentifier { name: String, line: usize, column: usize },

    #[error("frame is not flat (max |𝔉| = {residual:.3e}, tolerance {tol:.1e})")]
    NotFlat { residual: f64, tol: f64 },

    #[error("structure constants vary across the chart (residual {residual:.3e}, tolerance {tol:.1e})")]
    NotConstant { residual: f64, tol: f64 },

    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
