//! Batch front end for spinchaos experiments.
//!
//! An experiment is a single TOML file. [`config::ExperimentConfig`] parses
//! it under a strict schema and [`run::run`] executes it, writing CSV and
//! JSON results plus a `manifest.json` into the configured directory.

pub mod config;
pub mod run;

pub use config::{ExperimentConfig, ExperimentKind};
pub use run::{run, validate, CliError, CliResult, RunSummary};

/// Environment variable that sets the worker thread count.
pub const THREADS_ENV: &str = "SPINCHAOS_THREADS";
