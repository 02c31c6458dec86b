use thiserror::Error;

/// Errors produced anywhere in the lab.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("singular pivot at row {row} in tridiagonal factorization")]
    SingularPivot { row: usize },

    #[error("Chebyshev degree {degree} gives sup error {error:.3e} > {tol:.1e}; need degree >= {required}")]
    FilterDegree {
        degree: usize,
        error: f64,
        tol: f64,
        required: usize,
    },

    #[error("precondition violated: {0}")]
    Usage(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
