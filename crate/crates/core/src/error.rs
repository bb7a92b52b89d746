use thiserror::Error;

/// Errors raised by the energy, field, minimization and lifting routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("line search failed: {0}")]
    Step(String),

    #[error("degenerate plaquette at cell ({i}, {j}): an edge angle difference is exactly pi")]
    DegeneratePlaquette { i: usize, j: usize },

    #[error("search space too large: {0}")]
    Size(String),

    #[error("jump layers collide: {0}")]
    LayerCollision(String),

    #[error("inconsistent liftings: {0}")]
    Consistency(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, with all context layers stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
