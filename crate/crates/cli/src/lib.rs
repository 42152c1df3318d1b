//! Scenario files, built-in scenarios and the runner behind the `einforge` binary.

pub mod builtins;
pub mod config;
pub mod emit;
pub mod runner;

pub use config::{load_scenario, parse_scenario, ConfigError, ScenarioConfig};
pub use runner::{run_scenario, RunError, RunOptions, TierChoice};
