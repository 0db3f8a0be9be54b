//! Command-line front end for `nbs-core`.
//!
//! ```text
//! nbs <COMMAND> [--eta X] [--m N] [options]
//! ```
//!
//! Exit codes: 0 on success, 1 for invalid arguments, 2 for numerical
//! failures or failed checks.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};

pub use config::{parse_config, Command, Format, RunConfig};
pub use error::CliError;

/// Parses `argv`, runs the command and returns the exit code. Diagnostics go
/// to stderr.
pub fn main_with<I, T>(argv: I, env_tail_eps: Option<&str>) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_config(argv, env_tail_eps).and_then(|c| execute(&c)) {
        Ok(()) => 0,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            CliError::Clap(e).exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs `config`, writing to `--output` or stdout.
pub fn execute(config: &RunConfig) -> Result<(), CliError> {
    match &config.output {
        Some(path) => {
            let file = File::create(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            let mut w = BufWriter::new(file);
            let r = run::run(config, &mut w);
            w.flush().map_err(|source| CliError::Io { path: path.clone(), source })?;
            r
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            let r = run::run(config, &mut w);
            let _ = w.flush();
            r
        }
    }
}
