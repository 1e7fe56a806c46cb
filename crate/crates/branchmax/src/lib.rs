//! Ensemble runner, configuration, output formats and experiment driver
//! built on `branchmax-core`.

pub mod cli;
pub mod config;
pub mod ensemble;
mod error;
pub mod output;
pub mod run;

pub use config::{load_config, ConfigValues, Experiment, RunConfig};
pub use ensemble::run_ensemble;
pub use error::{ConfigError, RunError};
pub use run::{execute, run, Check, RunOutput};
