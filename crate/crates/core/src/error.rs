use thiserror::Error;

/// Errors raised by the scattering engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("non-triangular face at line {line}")]
    NonTriangularFace { line: usize },

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("size limit exceeded: {what} = {got} > {max}")]
    Size {
        what: &'static str,
        got: usize,
        max: usize,
    },

    #[error("overflow guard: |Re rho.x| = {0:.3} exceeds 40")]
    Overflow(f64),

    #[error("{0}; perturb k slightly and retry")]
    Singular(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("invalid medium: {0}")]
    Medium(String),

    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
