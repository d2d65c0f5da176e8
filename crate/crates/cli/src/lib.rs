//! Command-line front end for the carving simulator.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, Cli, CliError};
