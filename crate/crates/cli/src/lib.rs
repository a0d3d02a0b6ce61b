//! Command-line front end for the graphene coherent-state library.

pub mod commands;
pub mod config;
pub mod error;
pub mod ftable;

pub use commands::{execute, run, Artifact, RunOutput};
pub use config::{load_config, parse_config, Command, RunConfig};
pub use error::{CliError, CliResult};
