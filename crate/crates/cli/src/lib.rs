//! Configuration, commands and CSV output of the `d2d-coopnet` binary.

pub mod commands;
pub mod config;
pub mod table;
pub mod validate;

pub use commands::{CliError, Report, Status};
pub use config::{ConfigError, SystemConfig};
