//! Run configuration, output files and the command line.

pub mod cli;
pub mod config;
pub mod output;

pub use config::{load_config, RunConfig};
pub use output::{load_snapshot, write_outputs, Snapshot};
