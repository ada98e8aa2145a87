//! Experiment runner: TOML configurations and presets, orchestration of runs,
//! sweeps and diagnostics, and byte-stable CSV/JSON artifacts.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod experiment;
pub mod presets;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult, EXIT_CONFIG, EXIT_INADMISSIBLE, EXIT_NUMERICAL, EXIT_OK};
pub use experiment::{run_experiment, RunOutcome};
pub use presets::{preset, PRESET_NAMES};
