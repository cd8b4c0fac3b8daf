//! File formats, verification suites and the command-line front end for
//! `skorokhod-core`.

pub mod app;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod manifest;
pub mod verify;

pub use app::{run, Cli};
pub use error::CliError;
