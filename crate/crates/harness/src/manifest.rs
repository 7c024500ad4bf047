//! Run manifests: the resolved configuration, timings, warnings, and a
//! hashed inventory of every file the run produced. The manifest itself is
//! the last file written, atomically, so its presence marks a complete run.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::io;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub kind: String,
    pub seed: u64,
    pub config: serde_json::Value,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    /// file name → FNV-1a 64 content hash.
    pub files: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(cfg: &RunConfig) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            kind: cfg.kind.as_str().to_string(),
            seed: cfg.seed,
            config: serde_json::to_value(crate::config::echo_resolved(cfg))
                .expect("config echo serializes"),
            timings: BTreeMap::new(),
            warnings: Vec::new(),
            files: BTreeMap::new(),
        }
    }

    pub fn record_timing(&mut self, phase: &str, seconds: f64) {
        self.timings.insert(phase.to_string(), seconds);
    }

    pub fn record_warning(&mut self, text: String) {
        self.warnings.push(text);
    }

    /// Hashes everything currently in the directory and writes the manifest
    /// last.
    pub fn finalize(mut self, dir: &Path) -> std::io::Result<()> {
        for (path, hash) in io::inventory(dir)? {
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            if name != MANIFEST_NAME {
                self.files.insert(name, hash);
            }
        }
        let bytes = serde_json::to_vec_pretty(&self).expect("manifest serializes");
        io::write_atomic(&dir.join(MANIFEST_NAME), &bytes)
    }
}

pub fn read_manifest(dir: &Path) -> std::io::Result<RunManifest> {
    let bytes = std::fs::read(dir.join(MANIFEST_NAME))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))
}
