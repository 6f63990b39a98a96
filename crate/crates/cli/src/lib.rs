//! Command-line front end: experiment configs, the `rate`, `cgf`, `verify`
//! and `report` commands, and static SVG plots.

pub mod commands;
pub mod config;
pub mod plot;

pub use commands::{cmd_cgf, cmd_rate, cmd_report, cmd_verify, Outcome, RunOptions, Tally};
pub use config::{ExperimentConfig, GammaSpec, Locality};
