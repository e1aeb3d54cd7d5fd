use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid target set: {0}")]
    InvalidTarget(String),

    #[error("degenerate partition: {0}")]
    DegeneratePartition(String),

    #[error("matrix maps every trial start vector to zero")]
    ZeroImage,

    #[error("matrix dimension {dim} exceeds the dense eigensolver cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("size mismatch: {0} vs {1} nodes")]
    SizeMismatch(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("estimator undefined: {0}")]
    UndefinedEstimator(String),

    #[error("did not converge: {0}")]
    NotConverged(String),

    #[error("graph generation failed: {0}")]
    Generation(String),

    #[error("config {path}: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error stems from user input (files, config, parameters)
    /// rather than a numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::InvalidTarget(_)
                | Error::InvalidParameter(_)
                | Error::Config { .. }
                | Error::SizeMismatch(..)
                | Error::Io(_)
        )
    }
}
