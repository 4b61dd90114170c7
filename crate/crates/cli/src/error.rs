use std::path::PathBuf;

use thiserror::Error;

/// Exit status for successful runs.
pub const EXIT_OK: i32 = 0;
/// Output could not be written, or another I/O failure.
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_ACCEPTANCE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),

    #[error(transparent)]
    Core(#[from] nrlimit::Error),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{} failed acceptance check(s): {}", .0.len(), .0.join(", "))]
    Acceptance(Vec<String>),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use nrlimit::Error as E;
        match self {
            CliError::Json(_) | CliError::Invalid(_) => EXIT_VALIDATION,
            CliError::Io { .. } => EXIT_IO,
            CliError::Acceptance(_) => EXIT_ACCEPTANCE,
            CliError::Core(e) => match e {
                E::NotConverged { .. } | E::Collapse(_) | E::NonPositiveGap(_) | E::SweepAborted { .. } => {
                    EXIT_NOT_CONVERGED
                }
                E::Io(_) | E::Json(_) | E::Csv(_) | E::Snapshot(_) => EXIT_IO,
                _ => EXIT_VALIDATION,
            },
        }
    }
}
