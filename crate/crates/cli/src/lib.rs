//! Command-line front end for energy-guided evolutionary pruning.
//!
//! The algorithmic core lives in `eprune-core`; this crate adds everything
//! that touches the filesystem: JSON run configs, CSV/IDX dataset
//! ingestion, network checkpoints, mask files, per-epoch metrics, and the
//! classification report, plus the `eprune` binary with its `train`,
//! `baseline`, `bench`, and `eval` commands.

pub mod checkpoint;
pub mod cli;
pub mod commands;
pub mod config;
pub mod csv_data;
pub mod dataset;
pub mod error;
pub mod idx;
pub mod maskfile;
pub mod metrics;
pub mod report;

pub use cli::run;
pub use error::CliError;
