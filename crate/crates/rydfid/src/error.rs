use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver failed at {point}: {source}")]
    Solver {
        point: String,
        #[source]
        source: rydfid_core::Error,
    },
    #[error("gate search failed: {0}")]
    Search(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 ok, 1 validation failure, 2 config error, 3 solver non-convergence, 4 search failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Solver { .. } => 3,
            CliError::Search(_) => 4,
        }
    }

    pub fn solver(point: impl Into<String>, source: rydfid_core::Error) -> Self {
        match source {
            rydfid_core::Error::InvalidSetup(m) | rydfid_core::Error::InvalidArgument(m) => CliError::Config(m),
            source => CliError::Solver { point: point.into(), source },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
