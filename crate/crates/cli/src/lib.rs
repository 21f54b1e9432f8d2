//! Command-line surface of the Dicke QFI tools: configuration layering,
//! command dispatch and bit-stable CSV/JSON output.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{parse_config, CommandKind, ConfigLayer, RunConfig};
pub use error::CliError;
pub use run::{execute, run_command, RunOutput};
