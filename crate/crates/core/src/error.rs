use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{func}: {msg}")]
    Domain { func: &'static str, msg: String },

    #[error("non-finite value in {context} at {at}")]
    NonFinite { context: &'static str, at: f64 },

    #[error("wrong resistivity regime for {func}: expected {expected}, got {got}")]
    Regime {
        func: &'static str,
        expected: &'static str,
        got: String,
    },

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("Picard coupling did not converge after {iterations} iterations (residual {residual:.3e}); trace: {trace:?}")]
    PicardDivergence {
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },

    #[error("mass conservation violated: relative drift {drift:.3e} at t = {time:.3e}")]
    MassDrift { drift: f64, time: f64 },

    #[error("linear solver failed to converge ({iterations} iterations, residual {residual:.3e})")]
    LinearSolver { iterations: usize, residual: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            func,
            msg: msg.into(),
        }
    }

    /// True for failures of the numerical machinery (Picard, mass monitor, linear solves).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Context { source, .. } => source.is_numerical(),
            e => matches!(
                e,
                Error::PicardDivergence { .. }
                    | Error::MassDrift { .. }
                    | Error::LinearSolver { .. }
            ),
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
