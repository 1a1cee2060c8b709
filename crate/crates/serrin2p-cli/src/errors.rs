//! Error type of the front end and its mapping to process exit codes:
//! 0 success, 2 validation (bad arguments, bad files, inadmissible
//! parameters), 3 numerical failure (solver breakdown, non-convergence,
//! failed verification).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Missing or inconsistent command-line options.
    #[error("{0}")]
    Usage(String),

    /// Unreadable or unparseable input file (run configuration, boundary).
    #[error("{0}")]
    Input(String),

    /// Output could not be written.
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Lib(#[from] serrin2p::Error),

    /// The requested checks ran but did not pass.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) | CliError::Write { .. } => 2,
            CliError::Lib(e) => match e {
                serrin2p::Error::Domain(_) | serrin2p::Error::Geometry(_) => 2,
                serrin2p::Error::Solver(_)
                | serrin2p::Error::NonConvergence { .. }
                | serrin2p::Error::NoCrossing { .. } => 3,
            },
            CliError::Failed(_) => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
