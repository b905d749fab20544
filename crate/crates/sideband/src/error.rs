//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad arguments or malformed configuration.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("shift collisions between sites: {0:?}")]
    ShiftCollision(Vec<(usize, usize)>),

    #[error("matrix is not Hermitian (relative deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not symmetric (deviation {0:.3e})")]
    NotSymmetric(f64),

    #[error("solver did not converge, best residual {residual:.3e}")]
    NoConvergence { residual: f64 },

    #[error("band gap closes at k = ({0:.6}, {1:.6})")]
    GapClosure(f64, f64),

    #[error("series is not a two-step series: parity violation {0:.3e}")]
    Parity(f64),

    #[error("frequency ratio {0} is not an integer multiple of the gradient step")]
    NonIntegerFrequency(f64),

    #[error("step refinement did not converge: coarse and fine results differ by {diff:.3e} (tolerance {tol:.3e})")]
    Refinement { diff: f64, tol: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// True for errors caused by the caller's input rather than by numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Invalid(_) | Error::Config(_) | Error::Json(_) | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
