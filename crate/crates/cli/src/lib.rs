//! Experiment harness for the membrane laboratory: configuration, runs,
//! manifests and SVG output.

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod svg;

pub use config::Config;
pub use experiments::{run_experiment, run_solve, EXPERIMENTS};
pub use manifest::ExperimentManifest;
