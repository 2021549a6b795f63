//! Command-line driver for parameter scans, analysis pipelines and
//! plot-data output.
//!
//! CSV outputs share one schema,
//! `lambda,gamma,temperature,r,N,quantity,value,err_estimate`, and end
//! with a `complete` marker row. Structured results (collapse, crossover
//! maps, stabilizer states) are JSON. With `--output`, the effective
//! configuration is echoed into a `.meta.json` sidecar.

pub mod config;
pub mod grid;
pub mod output;
pub mod run;

use std::process::ExitCode;

use thiserror::Error;

/// Environment variable consulted when `--threads` is absent.
pub const THREADS_ENV: &str = "XYMAGIC_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or configuration; exit status 2.
    #[error("usage: {0}")]
    Usage(String),
    /// A numerical routine failed; exit status 1.
    #[error("numerical failure: {0}")]
    Numerical(#[from] xymagic::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Numerical(_) | CliError::Io(_) => ExitCode::from(1),
        }
    }
}

/// Thread count from the flag, then the environment, else `None`
/// (all cores).
pub fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(n) = flag {
        return match n {
            0 => Err(CliError::Usage("--threads must be at least 1".into())),
            n => Ok(Some(n)),
        };
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{THREADS_ENV}={v} is not a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}
