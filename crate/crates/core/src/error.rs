use thiserror::Error;

/// Errors raised by the correlation, model, and slice operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("inconsistent data: {what} (residual {residual:e} > tolerance {tol:e})")]
    Inconsistent {
        what: String,
        residual: f64,
        tol: f64,
    },

    #[error("infeasible correlation matrix: {inequality} fails at ({x},{y}) by {residual:e}")]
    InfeasibleMatrix {
        inequality: &'static str,
        x: usize,
        y: usize,
        residual: f64,
    },

    #[error("invalid model: {what} at question {question}, block {block} (residual {residual:e})")]
    ModelInvalid {
        what: &'static str,
        question: usize,
        block: usize,
        residual: f64,
    },

    #[error("infeasible linear program: {0}")]
    Infeasible(String),

    #[error("construction check failed: {0}")]
    Construction(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Malformed(_) => "malformed",
            Error::Unsupported(_) => "unsupported",
            Error::Precondition(_) => "precondition",
            Error::Inconsistent { .. } => "inconsistent",
            Error::InfeasibleMatrix { .. } => "infeasible-matrix",
            Error::ModelInvalid { .. } => "model-invalid",
            Error::Infeasible(_) => "infeasible",
            Error::Construction(_) => "construction",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
