use std::process::ExitCode;

/// Failure of a command, carrying the process exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or experiment file. Exit 2.
    #[error("{0}")]
    Usage(String),
    /// Input data that cannot be analysed. Exit 3.
    #[error("{0}")]
    Data(String),
    /// The command ran but something inside it failed. Exit 1.
    #[error("{0}")]
    Failed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::Io(io),
            kind => CliError::Failed(format!("csv: {kind:?}")),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Failed(format!("json: {e}"))
    }
}

pub(crate) fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

pub(crate) fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
