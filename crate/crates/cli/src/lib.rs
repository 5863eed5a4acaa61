//! Configuration-driven experiments for the `maxreg` library, written as CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod run;
pub mod table;

pub use config::{parse_config, RunConfig};
pub use error::CliError;
pub use run::{execute, run, RunOptions};
