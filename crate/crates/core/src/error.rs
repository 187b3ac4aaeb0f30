use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("numerical divergence at step {step}: {detail}")]
    Divergence { step: u64, detail: String },
    #[error("invalid candidate: {0}")]
    InvalidCandidate(String),
    #[error("optimizer did not converge: {0}")]
    NoConvergence(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt file at byte offset {offset}: {detail}")]
    Corrupt { offset: u64, detail: String },
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("config error: {0}")]
    Config(String),
    #[error("image error: {0}")]
    Image(String),
}

pub type Result<T> = std::result::Result<T, Error>;
