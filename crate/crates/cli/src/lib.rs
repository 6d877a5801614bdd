//! Experiment runner for `spinlab`: TOML configs in, JSON and CSV results plus
//! a manifest out.

pub mod config;
pub mod error;
pub mod presets;
pub mod runner;
pub mod setup;
pub mod tasks;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use runner::{run, Manifest, TaskStatus};
