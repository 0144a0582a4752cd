//! Experiment harness: configuration, Monte Carlo runners, CSV output and
//! threshold checks.

pub mod checks;
pub mod config;
pub mod csv;
pub mod experiments;
pub mod stats;

pub use checks::{check_table, CheckOutcome};
pub use config::{ConfigError, Experiment, ExperimentConfig};
pub use csv::{Cell, Table};
pub use experiments::{run_experiment, HarnessError};
