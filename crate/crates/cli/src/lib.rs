//! Configuration-driven front end for `nrlimit`.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::{parse_config, parse_config_with_overrides, parse_for_command, Command, RunConfig};
pub use error::CliError;
