//! Example runners for `spinlab-core` and the trace formats they write.
//!
//! Each command in [`commands`] takes a typed parameter set and returns one
//! or more [`Table`]s, which [`output`] writes as CSV or JSON.

pub mod commands;
pub mod error;
pub mod output;
pub mod spectrum;

pub use error::CliError;
pub use output::{Format, Table};

/// Version string written into every trace header.
pub const VERSION: &str = concat!("spinlab ", env!("CARGO_PKG_VERSION"));
