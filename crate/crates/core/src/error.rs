use thiserror::Error;

/// Errors raised by the library.
///
/// Variants fall into three families which the CLI maps to exit codes:
/// validation problems with inputs, model-domain failures, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid constellation: {0}")]
    InvalidConstellation(String),
    #[error("duplicate constellation points at rows {0} and {1}")]
    DuplicatePoint(usize, usize),
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("model domain error: {0}")]
    ModelDomain(String),
    #[error("unknown format `{0}`")]
    UnknownFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed file: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the physical/statistical model rather than
    /// by malformed inputs.
    pub fn is_model_domain(&self) -> bool {
        matches!(self, Error::ModelDomain(_) | Error::OutOfRange(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
