use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |H - H*| = {deviation:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("operator is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error(
        "threshold {threshold} lies within {tolerance:.1e} of eigenvalue {eigenvalue}; \
         evaluate at a midpoint between eigenvalues instead"
    )]
    ThresholdCollision {
        threshold: f64,
        eigenvalue: f64,
        tolerance: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("not a projection-valued measure: {0}")]
    InvalidPvm(String),

    #[error("not a positive operator-valued measure: {0}")]
    InvalidPovm(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid correlation table: {0}")]
    InvalidCorrelation(String),

    #[error("numerical consistency check failed: {0}")]
    Numerical(String),

    #[error(
        "standard-form dual is ill-conditioned: residual {residual:.3e}, \
         smallest positive eigenvalue of the reduced density {min_positive_eigenvalue:.3e}"
    )]
    Conditioning {
        residual: f64,
        min_positive_eigenvalue: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
