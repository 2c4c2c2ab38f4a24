use std::io;
use std::path::PathBuf;

use herdfield_core::sweep::ThresholdError;
use herdfield_core::SolveError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("`{0}` is required for this command")]
    Missing(&'static str),
    #[error("config is not valid JSON: {0}")]
    Syntax(String),
    #[error("cannot read config {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: malformed content: {reason}", path.display())]
    Parse { path: PathBuf, reason: String },
}

impl FormatError {
    pub(crate) fn parse(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        FormatError::Parse {
            path: path.into(),
            reason: reason.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        FormatError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Failure categories of a run, each with its own exit status.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("solver error: {0}")]
    Solve(String),
    #[error("I/O error: {0}")]
    Io(#[from] FormatError),
}

impl RunError {
    pub const CONFIG_EXIT: i32 = 2;
    pub const SOLVER_EXIT: i32 = 3;
    pub const IO_EXIT: i32 = 4;

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => Self::CONFIG_EXIT,
            RunError::Solve(_) => Self::SOLVER_EXIT,
            RunError::Io(_) => Self::IO_EXIT,
        }
    }
}

impl From<SolveError> for RunError {
    fn from(e: SolveError) -> Self {
        RunError::Solve(e.to_string())
    }
}

impl From<ThresholdError> for RunError {
    fn from(e: ThresholdError) -> Self {
        match e {
            ThresholdError::Unclassified { .. } => RunError::Solve(e.to_string()),
            ThresholdError::InvalidBracket { .. } | ThresholdError::NoSignChange { .. } => {
                RunError::Config(ConfigError::Invalid {
                    key: "lo".into(),
                    reason: e.to_string(),
                })
            }
        }
    }
}
