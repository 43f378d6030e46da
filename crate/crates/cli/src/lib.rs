//! Configuration, orchestration and file output for stubgraph experiments.

// Negated comparisons are deliberate: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod runner;
pub mod theory_cmd;

pub use config::{parse_config, ConfigError, ExperimentConfig};
pub use runner::{run_experiment, sweep, write_outputs, RunReport};
