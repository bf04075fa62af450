//! Experiment runner for the fewstate sketches: stream files, generator
//! specs, configuration, metered trials, sweeps and CSV output.

pub mod config;
pub mod io;
pub mod runner;
pub mod source;

use thiserror::Error;

pub use config::{Algo, Config, ConfigError};
pub use io::StreamFileError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Stream(#[from] StreamFileError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for configuration problems, 3 for anything touching files.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Stream(_) | CliError::Io { .. } | CliError::Csv(_) => 3,
        }
    }
}
