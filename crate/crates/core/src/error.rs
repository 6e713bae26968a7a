use thiserror::Error;

use crate::dynamics::PlateState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("assembly failed: {0}")]
    Assembly(String),

    /// Newton did not reach the residual tolerance; the caller should retry
    /// with a smaller step.
    #[error("newton solve did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonFailed { iterations: usize, residual: f64 },

    #[error("simulation diverged at t = {t}: {reason}")]
    Diverged {
        t: f64,
        reason: String,
        last_good: Option<Box<PlateState>>,
    },

    #[error("config error{}: {message}", key.as_ref().map(|k| format!(" at `{k}`")).unwrap_or_default())]
    Config { key: Option<String>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(key: Option<&str>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.map(str::to_owned),
            message: msg.into(),
        }
    }
}
