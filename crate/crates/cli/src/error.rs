use std::path::PathBuf;

use thiserror::Error;

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for unreadable or invalid configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for solver failures and failed report assertions.
pub const EXIT_NUMERICAL: i32 = 3;
/// Exit status for file system errors.
pub const EXIT_IO: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("check failed: {0}")]
    Check(String),

    #[error(transparent)]
    Core(#[from] s1phase_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("experiment {experiment:?}: {source}")]
    Experiment {
        experiment: String,
        #[source]
        source: Box<CliError>,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_experiment(self, name: &str) -> Self {
        CliError::Experiment {
            experiment: name.to_string(),
            source: Box::new(self),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Check(_) => EXIT_NUMERICAL,
            CliError::Core(e) => match e.root() {
                s1phase_core::Error::Config(_) => EXIT_CONFIG,
                s1phase_core::Error::Io(_) => EXIT_IO,
                _ => EXIT_NUMERICAL,
            },
            CliError::Io { .. } => EXIT_IO,
            CliError::Experiment { source, .. } => source.exit_code(),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
