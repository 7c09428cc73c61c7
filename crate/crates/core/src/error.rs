use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time {t} is not aligned with grid spacing {dt}")]
    Misaligned { t: f64, dt: f64 },

    #[error("window [{lo}, {hi}] exceeds sampled range [{start}, {end}]")]
    WindowExceeded {
        lo: f64,
        hi: f64,
        start: f64,
        end: f64,
    },

    #[error("circulant embedding has eigenvalue {min_eigenvalue:e} below -{threshold:e}")]
    EmbeddingFailed {
        min_eigenvalue: f64,
        threshold: f64,
    },

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("length mismatch: {what} has length {got}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("incompatible operands: {0}")]
    Incompatible(String),

    #[error("state norm {norm:e} exceeded blow-up guard at t = {t}")]
    BlowUp { t: f64, norm: f64 },

    #[error("truncation tail {tail:e} exceeds tolerance {tol:e}")]
    TailTolerance { tail: f64, tol: f64 },

    #[error("nonlinearity violates {condition} at u = {u}, v = {v} (margin {margin:e})")]
    Dissipativity {
        condition: &'static str,
        u: f64,
        v: f64,
        margin: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
