use std::path::PathBuf;

use crate::graph::ScalarField;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Graph construction rejected the input.
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// Malformed input file (graph JSON, solution or boundary CSV).
    #[error("{0}")]
    Format(String),

    #[error("refusing to enumerate subsets of {size} admissible vertices (limit {limit})")]
    SizeLimit { size: usize, limit: usize },

    #[error("singular Jacobian at iteration {iteration}: pivot {pivot:e} in column {column} is below {threshold:e}")]
    SingularJacobian { iteration: usize, column: usize, pivot: f64, threshold: f64, last_iterate: Box<ScalarField> },

    #[error("Newton iteration did not converge after {iterations} iterations ({reason}); residual sup-norm {residual_sup:e}")]
    NonConvergence { iterations: usize, residual_sup: f64, reason: &'static str, last_iterate: Box<ScalarField> },

    #[error("continuation failed at t = {t}: {source}")]
    Continuation {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Strips continuation wrappers down to the solver failure underneath.
    pub fn root(&self) -> &Error {
        match self {
            Error::Continuation { source, .. } => source.root(),
            other => other,
        }
    }

    /// Last Newton iterate carried by solver failures.
    pub fn last_iterate(&self) -> Option<&ScalarField> {
        match self.root() {
            Error::SingularJacobian { last_iterate, .. } | Error::NonConvergence { last_iterate, .. } => {
                Some(last_iterate)
            }
            _ => None,
        }
    }
}
