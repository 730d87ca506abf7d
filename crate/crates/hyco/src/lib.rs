//! File formats and run orchestration for the `hyco` command-line tool.
//!
//! A run directory holds:
//!
//! - `history.csv`: one row per epoch
//! - `summary.json`: final metrics, timings and the resolved configuration
//! - `dataset.csv` and `dataset.json`: the observations and their provenance
//! - `theta.json`: the trained network, when there is one
//! - `fields/*.csv`: truth and model fields at the reference nodes

pub mod config;
pub mod io;
pub mod run;

/// Failure classes with distinct exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("run failed: {0}")]
    Runtime(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) | CliError::Io { .. } => 2,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<hyco_core::Error> for CliError {
    fn from(e: hyco_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
