use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate polygon: {0}")]
    Degenerate(&'static str),
    #[error("image has zero area ({width}x{height})")]
    EmptyImage { width: u32, height: u32 },
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("empty mask")]
    EmptyMask,
    #[error("scene rejected by validation: {0}")]
    InvalidScene(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("generation infeasible: {0}")]
    Infeasible(String),
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("unsupported format `{0}`")]
    UnknownFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
