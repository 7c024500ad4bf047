//! Post-hoc inspection of a completed run directory: prints the manifest
//! summary and verifies that every listed file still hashes to its recorded
//! value.

use std::path::Path;

use crate::io;
use crate::manifest::{read_manifest, RunManifest, MANIFEST_NAME};

pub struct ReportOutcome {
    pub manifest: RunManifest,
    pub hash_mismatches: Vec<String>,
    pub unlisted_files: Vec<String>,
}

pub fn inspect(dir: &Path) -> std::io::Result<ReportOutcome> {
    let manifest = read_manifest(dir)?;
    let mut hash_mismatches = Vec::new();
    let mut unlisted_files = Vec::new();
    for (path, hash) in io::inventory(dir)? {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        if name == MANIFEST_NAME {
            continue;
        }
        match manifest.files.get(&name) {
            Some(recorded) if *recorded == hash => {}
            Some(recorded) => {
                hash_mismatches.push(format!("{name}: recorded {recorded}, found {hash}"))
            }
            None => unlisted_files.push(name),
        }
    }
    Ok(ReportOutcome { manifest, hash_mismatches, unlisted_files })
}

pub fn render(outcome: &ReportOutcome) -> String {
    let m = &outcome.manifest;
    let mut out = String::new();
    out.push_str(&format!(
        "run kind: {}\nversion: {}\nseed: {}\n",
        m.kind, m.version, m.seed
    ));
    out.push_str("timings:\n");
    for (phase, secs) in &m.timings {
        out.push_str(&format!("  {phase}: {secs:.3}s\n"));
    }
    if m.warnings.is_empty() {
        out.push_str("warnings: none\n");
    } else {
        out.push_str("warnings:\n");
        for w in &m.warnings {
            out.push_str(&format!("  {w}\n"));
        }
    }
    out.push_str(&format!("files: {}\n", m.files.len()));
    for (name, hash) in &m.files {
        out.push_str(&format!("  {name}  {hash}\n"));
    }
    if outcome.hash_mismatches.is_empty() && outcome.unlisted_files.is_empty() {
        out.push_str("integrity: ok\n");
    } else {
        for h in &outcome.hash_mismatches {
            out.push_str(&format!("integrity: MODIFIED {h}\n"));
        }
        for u in &outcome.unlisted_files {
            out.push_str(&format!("integrity: UNLISTED {u}\n"));
        }
    }
    out
}
