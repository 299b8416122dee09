//! Library side of the `gasnet` command: scenario files, expression
//! parsing and command execution.

pub mod commands;
pub mod config;
pub mod error;
pub mod expr;
pub mod scenario;

pub use commands::run;
pub use config::{Command, Overrides, Problem, RunConfig};
pub use error::{exit, CliError};
