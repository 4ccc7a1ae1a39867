use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode cutoff must be at least 1, got {0}")]
    InvalidCutoff(usize),
    #[error("dc is not a probability law: a zero-mode law must be configured to sample c")]
    MissingZeroModeLaw,
    #[error("divergent value: {0}")]
    Divergent(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid parameter {name} = {value}: expected {expected}")]
    InvalidParameter { name: &'static str, value: f64, expected: &'static str },
    #[error("parity mismatch between operators")]
    ParityMismatch,
    #[error("gluing diverges: shared block of dimension {dim} is not positive definite")]
    NotPositiveDefinite { dim: usize },
    #[error("insufficient quadrature: {nodes} nodes, at least {required} required")]
    InsufficientQuadrature { nodes: usize, required: usize },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, expected: "a finite positive number" })
    }
}

pub(crate) fn check_nonneg(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, expected: "a finite nonnegative number" })
    }
}
