use std::path::PathBuf;

use crate::config::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] scflab_core::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("tolerance breach: {quantity} deviation {deviation:e} at t = {time} exceeds {tolerance:e}")]
    Tolerance { quantity: String, deviation: f64, time: f64, tolerance: f64 },
}

impl CliError {
    /// 0 success, 1 runtime failure, 2 configuration error, 3 tolerance breach.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Tolerance { .. } => 3,
            CliError::Core(_) | CliError::Io { .. } => 1,
        }
    }
}
