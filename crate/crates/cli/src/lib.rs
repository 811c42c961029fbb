//! Experiment runner: configurations, result tables, CSV and SVG output.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod reproduce;
pub mod svg;
pub mod table;

pub use config::{Experiment, ExperimentConfig};
pub use error::{CliError, CliResult};
pub use experiments::{run, Context};
pub use table::ResultTable;
