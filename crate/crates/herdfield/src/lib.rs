//! Configuration, file formats and subcommands around [`herdfield_core`].

pub mod config;
pub mod error;
pub mod format;
pub mod io;
pub mod parallel;
pub mod run;

pub use config::{parse_config, Command, RunConfig};
pub use error::{ConfigError, FormatError, RunError};
pub use run::{run, RunOutput};
