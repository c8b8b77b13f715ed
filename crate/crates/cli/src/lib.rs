//! Command-line harness around `neuroarm-core`: collect synthetic
//! recordings, train and evaluate the classifier, run a live session
//! against the simulated arm and replay its log.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod report;

pub use config::HarnessConfig;
pub use error::{exit, CliError, CliResult};
pub use manifest::RunDir;
