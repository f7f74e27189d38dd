use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid matrix dimension {0}; need N >= 2")]
    InvalidDimension(usize),
    #[error("matrix is singular")]
    Singular,
    #[error("non-finite values in {0}")]
    NonFinite(String),
    #[error("matrix is not in su(N): hermitian part {hermitian_part:.3e}, trace {trace:.3e}")]
    NotInAlgebra { hermitian_part: f64, trace: f64 },
    #[error("not a rank-one projector: {0}")]
    NotAProjector(String),
    #[error("zero vector has no projector")]
    ZeroVector,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("chart mismatch: expected {expected}, got {got}")]
    ChartMismatch { expected: String, got: String },
    #[error("spectral parameter {0} is too close to +1 or -1")]
    LambdaSingular(String),
    #[error("ladder contracted to zero (max denominator {0:.3e})")]
    ContractedToZero(f64),
    #[error("deformed field left the domain of the functional: {0}")]
    DeformationOutOfDomain(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
