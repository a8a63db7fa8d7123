//! Config-driven experiment runner for the `bbjump` simulator.

use std::fmt;
use std::path::PathBuf;

pub mod config;
pub mod report;
pub mod scenarios;

pub use config::{ConfigError, ExperimentConfig, OutputFormat};
pub use report::ExperimentReport;
pub use scenarios::{run_scenario, Scenario};

/// Environment variable overriding the configured output directory.
pub const OUT_DIR_ENV: &str = "BBJUMP_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Simulation(bbjump::Error),
    Io(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Simulation(_) | RunError::Io(_) => EXIT_FAILURE,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "invalid config: {e}"),
            RunError::Simulation(e) => write!(f, "simulation failed: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<bbjump::Error> for RunError {
    fn from(e: bbjump::Error) -> Self {
        RunError::Simulation(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

/// Output directory by precedence: flag, then environment, then config.
pub fn resolve_output_dir(flag: Option<PathBuf>, env: Option<PathBuf>, config: Option<PathBuf>) -> Option<PathBuf> {
    flag.or(env).or(config)
}
