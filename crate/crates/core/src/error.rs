use thiserror::Error;

use crate::realizability::ValidationError;
use crate::synthesis::Synthesis;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid system: {0}")]
    Validation(#[from] ValidationError),

    #[error("invalid tolerance `{name}` = {value}: must be finite and strictly positive")]
    Tolerance { name: &'static str, value: f64 },

    #[error("matrix is not Hermitian (relative residual {residual:.3e} > {tol:.3e})")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("factorization error: {0}")]
    Factorization(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("numerical rank instability: skew-symmetric matrix reported odd rank {rank}")]
    OddRank { rank: usize },

    #[error("synthesized realization failed verification: {}", .0.residuals.failures().join(", "))]
    ResidualsExceeded(Box<Synthesis>),
}

impl Error {
    /// Process exit status: 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            _ => 1,
        }
    }
}
