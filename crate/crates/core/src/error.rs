use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero vector has no sign pattern")]
    ZeroVector,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("unknown model label `{0}`")]
    UnknownModel(String),

    #[error("unsupported schema version `{0}`")]
    SchemaVersion(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
