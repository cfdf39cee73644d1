use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_PARITY: i32 = 2;
pub const EXIT_BRANCH: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] ccd_core::Error),
    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use ccd_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Parse(_) | CliError::Io { .. } => EXIT_USAGE,
            CliError::Output(_) => EXIT_CHECK_FAILED,
            CliError::Core(e) => match e {
                E::UnsupportedParity { .. }
                | E::EntanglerNonexistent { .. }
                | E::FinaglerArgument { .. } => EXIT_PARITY,
                E::BranchSelection { .. }
                | E::Convergence { .. }
                | E::NumericalInconsistency { .. }
                | E::Optimization(_)
                | E::Degeneracy(_)
                | E::Structure(_) => EXIT_BRANCH,
                E::Shape { .. }
                | E::Precondition(_)
                | E::Size { .. }
                | E::Normalization { .. }
                | E::Argument(_)
                | E::Index(_) => EXIT_USAGE,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
