use thiserror::Error;

/// Errors raised by the algebra, map and extremality routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("factor index {index} out of range for a product of {factors} factors")]
    Index { index: usize, factors: usize },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("map is not trace preserving (residual {residual:.3e})")]
    NotChannel { residual: f64 },

    #[error("operator is not invertible on its algebra (min eigenvalue {min_eigenvalue:.3e})")]
    NotInvertible { min_eigenvalue: f64 },

    #[error("effects do not form a projection valued measure: {0}")]
    NotPvm(String),

    #[error("not a member of the constraint set: {0}")]
    NotMember(String),

    #[error("not a 1-tester: {0}")]
    NotTester(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
