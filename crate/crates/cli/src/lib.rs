//! Config handling and subcommands for the `radshoot` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{GridSpec, RunConfig};
pub use error::CliError;
