use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("region is empty")]
    EmptyRegion,

    #[error("depth level {level} out of range [1, {max}]")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("oracle size guard: n = {n} exceeds {max}")]
    SizeGuard { n: usize, max: usize },

    #[error("shape matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("shape matrix is not symmetric (max asymmetry {asymmetry:e})")]
    Asymmetric { asymmetry: f64 },

    #[error("covariance factorization failed (smallest eigenvalue {min_eigenvalue:e})")]
    Factorization { min_eigenvalue: f64 },

    #[error("contamination fraction {0} outside [0, 0.5)")]
    EpsilonOutOfRange(f64),

    #[error("every sampled direction has zero MAD")]
    AllDirectionsDegenerate,

    #[error("compute budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
