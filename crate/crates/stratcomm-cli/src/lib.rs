//! Configuration, experiment drivers and verification suites behind the `stratcomm` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod suites;

pub use error::{CliError, CliResult};
