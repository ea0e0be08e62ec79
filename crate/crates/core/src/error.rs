use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {diff:e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("requested {requested} eigenpairs from an order-{order} system")]
    InvalidCount { requested: usize, order: usize },

    #[error("first-order denominator v^T dM v = {0:e} is too small")]
    DegenerateDenominator(f64),

    #[error("epsilon must lie in (0, 1], got {0}")]
    InvalidEpsilon(f64),

    #[error("packed perturbation has length {found}, expected {expected}")]
    BadLength { expected: usize, found: usize },

    #[error("objective returned NaN at iteration {iteration} for particle {particle}")]
    ObjectiveNonFinite { iteration: usize, particle: usize },

    #[error("{name} must be positive, got {value}")]
    NonPositiveInput { name: &'static str, value: f64 },

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
