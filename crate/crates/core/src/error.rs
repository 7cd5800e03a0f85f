use thiserror::Error;

/// Errors raised by state construction, measure evaluation and Bell maximization.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state is not normalized: norm² = {0}")]
    NotNormalized(f64),
    #[error("invalid canonical parameters: {0}")]
    InvalidCanonical(String),
    #[error("non-finite parameter: {0}")]
    NonFinite(&'static str),
    #[error("invalid partial trace: must keep 1 or 2 qubits, got {0}")]
    InvalidKeep(usize),
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("numerical defect: {0}")]
    Numerical(String),
    #[error("value {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("vector is not a unit vector: |v|² = {0}")]
    NotUnit(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
