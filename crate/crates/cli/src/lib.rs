//! Config-driven experiment runner: reads a JSON experiment file, runs each
//! experiment into its own output directory and writes CSV tables, SVG plots,
//! a summary and a content-hashed manifest.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod curve;
pub mod error;
pub mod experiments;
pub mod output;
pub mod scene;
pub mod svg;

pub use config::{load_config, parse_config, ExperimentConfig, Kind};
pub use error::{CliError, Result};
pub use experiments::{run_batch, run_experiment, Outcome};
