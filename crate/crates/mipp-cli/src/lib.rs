//! Batch front end for the MIPP library: strict key=value configuration,
//! deterministic CSV artifacts, and the full validation battery.

pub mod config;
pub mod csvfmt;
pub mod run;
pub mod validate;

pub use config::{parse_cli_args, parse_config_text, parse_mixture, resolve, Command, RunConfig};
pub use run::{run, RunError};
