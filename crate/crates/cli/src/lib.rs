//! Batch runner: reads a JSON scenario, runs one command and writes CSV.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, Command, ConfigError, RunConfig};
pub use output::Table;
pub use run::{config_hash, run};
