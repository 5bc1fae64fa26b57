//! Experiment harness around `gridcast-core`: configuration, CSV dataset
//! ingest and export, result tables, gnuplot plot data and the run layout
//! on disk. The `gridcast` binary is a thin CLI over [`experiments::run`]
//! and [`output::write_output`].

pub mod config;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod export;
pub mod output;
pub mod plot;
pub mod table;

pub use config::{ExperimentKind, RunConfig};
pub use error::{ConfigError, HarnessError, Result};
