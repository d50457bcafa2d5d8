//! Configuration, presets and output for the `kitaev` command.

pub mod config;
pub mod presets;
pub mod run;
pub mod verify;

use std::io;
use std::path::{Path, PathBuf};

pub use config::{parse_config, parse_with, ConfigError, Overrides, RunConfig, TaskKind, TaskParams};
pub use run::{run, RunReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] kitaev_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("unknown preset `{0}` (available: {list})", list = presets::names().join(", "))]
    UnknownPreset(String),
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::UnknownPreset(_) => 2,
            CliError::Numerical(_) | CliError::Verify(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}
