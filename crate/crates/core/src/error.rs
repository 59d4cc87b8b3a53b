use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema error on line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error("degenerate orientation: forward axis is parallel to gravity (ground projection norm {norm:e})")]
    DegenerateOrientation { norm: f64 },

    #[error("no manipulation zones: no candidate frames survived duration filtering")]
    NoManipulationZones,

    /// Non-finite cost during the line search. Carries the last finite iterate
    /// as `(v, omega)` pairs.
    #[error("numerical failure: {message}")]
    NumericalFailure {
        message: String,
        last_iterate: Vec<(f64, f64)>,
    },

    #[error("window {index}: {source}")]
    Window {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Strips [`Error::Window`] wrappers and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Window { source, .. } => source.root(),
            other => other,
        }
    }
}
