//! Experiment runner for the coxcell engines: parameter sweeps, figure data
//! and analytic-versus-simulation comparison tables.

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod runner;
pub mod spec;

pub use cli::{run, Cli};
pub use error::CliError;
pub use runner::ComparisonRow;
pub use spec::ExperimentSpec;
