//! Config-driven experiment runner for `qha-core`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod families;
pub mod suite;

pub use config::Config;
pub use error::{CliError, CliResult};
pub use experiments::Experiment;
pub use suite::{run_suite, SuiteReport};
