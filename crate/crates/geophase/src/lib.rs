//! Command-line driver, file formats and parallel runners for
//! `geophase-core`.
//!
//! The binary `geophase` wraps [`cli::run`]; everything it does is also
//! reachable from here so that runs can be scripted or tested in-process.

pub mod angle;
pub mod cli;
pub mod config;
pub mod output;
pub mod parallel;
pub mod validate;

pub use cli::{run, Cli, CliError};
