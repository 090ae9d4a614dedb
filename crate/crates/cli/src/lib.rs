//! Experiment runner: configuration, subcommands and output files.

pub mod commands;
pub mod config;

pub use commands::{cmd_run, cmd_table, make_plan, prepare, Prepared, RunOptions, TABLE_ROWS};
pub use config::{ExperimentConfig, Preset};
