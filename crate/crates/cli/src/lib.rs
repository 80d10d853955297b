//! Configuration, presets and report emission for the `warpsym` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod scenario;

pub use config::{load_config, preset, ScenarioConfig, PRESETS};
pub use error::{exit, CliError, CliResult};
pub use scenario::{run_config, run_scenario, ScenarioReport};
