use thiserror::Error;

use crate::agents::AgentError;
use crate::amsa::AmsaError;
use crate::exchange::SimError;
use crate::marketdata::DataError;
use crate::metrics::MetricsError;

/// Crate-level error; wraps the per-module error types.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Amsa(#[from] AmsaError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl Error {
    /// Short module tag used by the CLI error prefix.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Data(_) => "data",
            Error::Sim(_) => "exchange",
            Error::Agent(_) => "agents",
            Error::Amsa(_) => "amsa",
            Error::Metrics(_) => "metrics",
        }
    }
}
