//! Command-line harness for scflab: experiment configuration, the
//! `simulate`, `audit`, `sweep` and `compare` commands, and their CSV/JSON
//! output.

pub mod commands;
pub mod config;
pub mod error;
mod output;

pub use commands::{run, CommandKind, Outcome};
pub use config::{ConfigError, ExperimentConfig, Origin};
pub use error::CliError;
