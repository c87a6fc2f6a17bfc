use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid potential: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("log-magnitude {0} out of representable range")]
    Overflow(f64),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("basis size {requested} exceeds the configured maximum {max}")]
    Resource { requested: usize, max: usize },

    #[error("eigensolver did not converge: {0}")]
    NonConvergence(String),

    #[error("truncation not converged: {0}")]
    Truncation(String),

    #[error("Neumann series check failed: {0}")]
    NeumannDivergence(String),

    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
