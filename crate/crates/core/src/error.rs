use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is numerically singular (pivot {pivot:.3e} below floor {floor:.3e})")]
    SingularMatrix { pivot: f64, floor: f64 },

    #[error("QR iteration did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },

    #[error("at exceptional point: {0}")]
    AtExceptionalPoint(String),

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("ambiguous state matching for row {row}")]
    AmbiguousMatching { row: usize },

    #[error("state is not metric-normalized: <psi|G|psi> = {norm}")]
    NotNormalized { norm: f64 },

    #[error("pair is not biorthonormal: <l|r> = {overlap}")]
    NotBiorthonormal { overlap: String },

    #[error("operator is not a valid metric: {0}")]
    InvalidMetric(String),

    #[error("fidelity step too large: |1 - F| = {deviation:.3e} > 0.5")]
    StepTooLarge { deviation: f64 },

    #[error("invalid sweep specification: {0}")]
    InvalidSpec(String),

    #[error("even system size N = {0} rejected; use odd N")]
    EvenNRejected(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
