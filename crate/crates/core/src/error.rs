use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Paired contraction axes whose dimensions disagree (or are otherwise unusable).
    #[error("shape error: axis {a_axis} (dim {a_dim}) cannot pair with axis {b_axis} (dim {b_dim})")]
    AxisMismatch {
        a_axis: usize,
        b_axis: usize,
        a_dim: usize,
        b_dim: usize,
    },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("resource limit: {what} needs {needed} qubits, cap is {cap}")]
    ResourceLimit {
        what: &'static str,
        needed: usize,
        cap: usize,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
