use std::path::PathBuf;

use thiserror::Error;

use crate::ids::CellId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("failed to parse {what}: {message}")]
    Parse { what: String, message: String },

    #[error("cannot load scenario {path}: {source}")]
    ScenarioLoad {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("measurement buffer is empty")]
    EmptyBuffer,

    #[error("execute condition queried for unprepared cell {0}")]
    ExecOnUnpreparedCell(CellId),

    #[error("no dedicated preamble left in cell {0}")]
    PreamblePoolExhausted(CellId),

    #[error("no successful random access in the run")]
    NoAccessEvents,

    #[error("results do not cover the axes needed for figure {0}")]
    MissingAxisCoverage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    /// True for errors caused by user input rather than by the run itself.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::Parse { .. }
                | Error::ScenarioLoad { .. }
                | Error::MissingAxisCoverage(_)
        )
    }
}
