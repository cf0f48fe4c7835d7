//! Command-line front end for `ddc-core`: kernel maps and capacity sweeps as
//! CSV, channel application on user states, and the validation suite.

pub mod cli;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod sweep;
pub mod validate;

pub use error::CliError;
