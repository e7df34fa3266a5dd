//! Harness library behind the `attractor-lab` binary: configuration loading,
//! experiment orchestration, artifact persistence and report generation.

pub mod artifacts;
pub mod config;
pub mod manifest;
pub mod pca;
pub mod report;
pub mod runner;
pub mod thresholds;

pub use config::{ConfigError, RunConfig};
pub use manifest::RunManifest;
pub use report::{report, Summary};
pub use runner::{run, HarnessError};
