use thiserror::Error;

/// Errors raised by graph construction, calculators and file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("edge {edge:?}: expected {expected} vertices, found {found}")]
    Arity {
        edge: Vec<usize>,
        expected: usize,
        found: usize,
    },
    #[error("edge {edge:?}: repeated vertex {vertex}")]
    RepeatedVertex { edge: Vec<usize>, vertex: usize },
    #[error("edge {edge:?}: vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { edge: Vec<usize>, vertex: usize, n: usize },
    #[error("incompatible graphs: {0}")]
    Mismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
