use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Fields living on different grids, wrong sample counts, wrong arity.
    #[error("structural mismatch: {0}")]
    Structural(String),

    /// An argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid or inconsistent run parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// Non-finite or runaway samples in a time integrator.
    #[error("numerical divergence at t = {t}: {reason}")]
    Divergence { t: f64, reason: String },

    /// The limit solution left its smoothness window.
    #[error("validity horizon reached at t = {t}: {reason}")]
    Horizon { t: f64, reason: String },

    #[error("{context}: {source}")]
    Annotated {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Structural,
    Domain,
    Config,
    Divergence,
    Horizon,
    Io,
}

impl Error {
    pub fn annotate(self, context: impl Into<String>) -> Self {
        Error::Annotated {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Structural(_) => ErrorKind::Structural,
            Error::Domain(_) => ErrorKind::Domain,
            Error::Config(_) => ErrorKind::Config,
            Error::Divergence { .. } => ErrorKind::Divergence,
            Error::Horizon { .. } => ErrorKind::Horizon,
            Error::Annotated { source, .. } => source.kind(),
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => ErrorKind::Io,
        }
    }
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}
