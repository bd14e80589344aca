//! Command-line workbench: file formats, certificates and subcommands.

pub mod certificate;
pub mod commands;
pub mod format;
pub mod payload;

pub use commands::{run, verify, Cli, Command, WorkbenchConfig, HOLDS, INCONCLUSIVE, INPUT_ERROR, REFUTED};
