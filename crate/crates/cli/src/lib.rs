//! Command-line front end: configuration, the subcommands and CSV output.

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

pub use commands::{run, Output};
pub use config::{Command, RunConfig, Settings};
pub use error::CliError;
pub use table::{Cell, Table};
