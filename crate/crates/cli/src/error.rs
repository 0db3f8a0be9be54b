use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced by the command line, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Clap(#[from] clap::Error),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Numerics(#[from] nbs_core::Error),

    #[error("cannot access {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{failed} of {total} checks failed")]
    Verify { failed: usize, total: usize },
}

impl CliError {
    /// 0 for help and version output, 1 for bad input, 2 for numerical
    /// failures and failed checks.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Clap(e) if !e.use_stderr() => 0,
            CliError::Clap(_) | CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Numerics(e) if e.is_numerical() => 2,
            CliError::Numerics(_) => 1,
            CliError::Verify { .. } => 2,
        }
    }
}
