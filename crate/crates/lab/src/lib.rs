//! File formats, configuration and experiment commands for `plateau-core`.
//!
//! The `plateau` binary is a thin wrapper over [`cli::run`].

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod io;

pub use error::{LabError, Result};
