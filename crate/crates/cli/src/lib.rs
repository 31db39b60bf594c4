//! Experiment runner: TOML configs in, provenance-stamped JSON and CSV out.

pub mod accept;
pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::CliError;
