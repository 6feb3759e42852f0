//! Run manifests: the resolved config, artifact hashes and timing.

use std::fs;
use std::path::Path;
use std::time::Duration;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::render_flat;
use crate::error::{AppError, Result};
use crate::formats::{write_file, write_json, SCHEMA_VERSION};

pub const MANIFEST_FILE: &str = "manifest.json";
/// Re-running with `--config` on this file reproduces the CSV outputs.
pub const RUN_CONF_FILE: &str = "run.conf";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct RunRecord<'a> {
    pub command: &'a str,
    pub config: &'a [(String, String)],
    pub artifacts: &'a [String],
    pub threads: Option<usize>,
    pub wall_time: Duration,
}

/// Writes `run.conf` and `manifest.json` into `dir`; artifacts are hashed
/// from disk, so they must already be written.
pub fn write_manifest(dir: &Path, rec: &RunRecord<'_>) -> Result<()> {
    let conf_path = dir.join(RUN_CONF_FILE);
    let conf = render_flat(rec.config);
    write_file(&conf_path, |w| w.write_all(conf.as_bytes()))?;

    let mut files = Vec::new();
    for name in rec.artifacts.iter().map(String::as_str).chain([RUN_CONF_FILE]) {
        let path = dir.join(name);
        let bytes = fs::read(&path).map_err(|e| AppError::io(&path, e))?;
        files.push(json!({ "file": name, "bytes": bytes.len(), "sha256": sha256_hex(&bytes) }));
    }
    let config: Map<String, Value> = rec.config.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
    let manifest = json!({
        "schema_version": SCHEMA_VERSION,
        "tool": "ailimit",
        "command": rec.command,
        "versions": {
            "ailimit": env!("CARGO_PKG_VERSION"),
            "ailimit-core": ailimit_core_version(),
        },
        "config": config,
        "artifacts": files,
        "threads": rec.threads,
        "wall_time_seconds": rec.wall_time.as_secs_f64(),
    });
    write_json(&dir.join(MANIFEST_FILE), &manifest)
}

fn ailimit_core_version() -> &'static str {
    // both crates are versioned together in this workspace
    env!("CARGO_PKG_VERSION")
}
