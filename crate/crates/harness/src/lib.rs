//! Experiment orchestration: configuration, dispatch, reproducibility
//! manifests, and CSV/JSON emission for the workbench.
//!
//! Every run is driven by a strict TOML configuration (unknown keys are
//! rejected, every violation is reported, and defaults are echoed back into
//! the manifest), writes its outputs into a dedicated directory, and ends by
//! atomically writing a manifest listing every file with a content hash.
//! Fixed seed in, bit-identical outputs out.

pub mod config;
pub mod io;
pub mod manifest;
pub mod report;
pub mod run;

pub use config::{ConfigError, RunConfig};
pub use manifest::RunManifest;
pub use run::{run_experiment, RunError};
