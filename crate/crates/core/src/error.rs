use thiserror::Error;

/// Errors raised by the simulator, optimizers and experiment harness.
#[derive(Debug, Error)]
pub enum VqeError {
    /// Invalid sizes, hyperparameters or experiment settings.
    #[error("configuration error: {0}")]
    Config(String),
    /// An argument violates an operation's precondition (index, length).
    #[error("usage error: {0}")]
    Usage(String),
    #[error("observable cannot be split into Z and X measurement groups: {0}")]
    UnsupportedGrouping(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("invalid TOML config: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = VqeError> = std::result::Result<T, E>;

impl VqeError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        VqeError::Config(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        VqeError::Usage(msg.into())
    }
}
