use thiserror::Error;

use crate::minimizer::GroundState;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("r = {r} lies outside the tabulated range [{lo}, {hi}]")]
    Extrapolation { r: f64, lo: f64, hi: f64 },

    #[error("inadmissible potential: {0}")]
    Inadmissible(String),

    #[error("internal consistency check failed for {what}: {lhs} vs {rhs}")]
    Consistency {
        what: &'static str,
        lhs: f64,
        rhs: f64,
    },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        partial: Box<GroundState>,
    },

    #[error("energy increased at iteration {iteration} with the step size at its floor")]
    Instability {
        iteration: usize,
        partial: Box<GroundState>,
    },

    #[error("sweep entry {index} (N = {n}) failed: {source}")]
    Sweep {
        index: usize,
        n: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("need at least {needed} entries, got {got}")]
    Arity { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// The partially converged state carried by solver failures, if any.
    pub fn partial_state(&self) -> Option<&GroundState> {
        match self {
            Error::NonConvergence { partial, .. } | Error::Instability { partial, .. } => {
                Some(partial)
            }
            Error::Sweep { source, .. } => source.partial_state(),
            _ => None,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
