use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("teacher vector is zero")]
    ZeroTeacher,
    #[error("singular configuration: {0}")]
    Singular(&'static str),
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("complex eigenvalues encountered (max imaginary part {0:e})")]
    ComplexEigenvalues(f64),
    #[error("non-finite state at t = {time}")]
    NonFinite { time: f64 },
    #[error("iterate diverged at step {step}")]
    Diverged { step: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
