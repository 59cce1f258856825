//! Command-line front end for the `quasi-sierpinski` crate: run-config
//! parsing, JSON/CSV artifacts, SVG plots and the `qsier` subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod json;
pub mod plot;

pub use commands::{run, Cli, Outcome};
pub use error::CliError;
