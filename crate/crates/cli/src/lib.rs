//! Command-line front end: scenario files, mechanism runs, sampling,
//! verification campaigns and the VCG counterexample.

pub mod commands;
pub mod error;
pub mod report;
pub mod scenario;

pub use commands::{execute, Cli, Output};
pub use error::CliError;
