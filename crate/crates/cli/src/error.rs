use thiserror::Error;

/// Failures of a run, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration or usage.
    #[error("{0}")]
    Config(String),

    /// Reading or writing files.
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    /// One or more acceptance criteria failed.
    #[error("{0} criteria failed")]
    CheckFailed(usize),

    /// The computation itself failed.
    #[error("numerical failure: {0}")]
    Numerical(#[from] scarchain::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io { .. } => 2,
            Self::CheckFailed(_) => 3,
            Self::Numerical(_) => 4,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io { context: context.into(), source }
    }
}

pub type CliResult<T> = Result<T, CliError>;
