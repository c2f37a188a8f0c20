//! Command-line front end for the `spgs` ground-state solver.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod validate;

pub use config::{parse_config, RunConfig};
pub use error::CliError;
pub use run::{run, RunReport};
