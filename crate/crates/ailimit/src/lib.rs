//! Batch driver for `ailimit-core`: parallel grid sweeps, CSV/JSON artifacts,
//! PPM heatmaps, run manifests and the `ailimit` command line.
//!
//! Parallel results are assembled by cell index, so every output is
//! independent of the thread count.

pub mod cli;
pub mod config;
mod error;
pub mod formats;
pub mod heatmap;
pub mod manifest;
pub mod par;

pub use ailimit_core as core;
pub use error::{AppError, Result};
