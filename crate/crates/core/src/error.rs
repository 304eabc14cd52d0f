use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("state dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("permutation size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("instance too large for exhaustive search: {evaluations:.3e} sequences exceed the cap of {cap:.3e}")]
    InstanceTooLarge { evaluations: f64, cap: f64 },

    #[error("zero pattern at frame {frame} admits no doubly stochastic matrix")]
    InfeasiblePattern { frame: usize },

    #[error("linear program is {0}")]
    Lp(&'static str),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
