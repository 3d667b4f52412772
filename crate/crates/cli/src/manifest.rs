//! Run manifests.
//!
//! Every result file written by a command carries a `"manifest"` field with
//! the file name of its manifest. The manifest records what went in, what
//! came out and under which settings, so that a rerun with the same inputs
//! and flags reproduces every output byte for byte (timestamps aside).

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use steerkit_core::Tolerances;

/// Content hash in the style of a git blob object, with SHA-256:
/// `sha256("blob <len>\0" ++ bytes)`.
pub fn blob_hash(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("blob {}\0", bytes.len()).as_bytes());
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}

#[derive(Debug, Clone, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub hash: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub arguments: Vec<String>,
    pub inputs: Vec<InputRecord>,
    pub tolerances: Tolerances,
    pub seed: Option<u64>,
    pub outputs: Vec<InputRecord>,
    /// Corrections applied while loading inputs.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub corrections: Vec<Value>,
    pub timestamp_unix: u64,
}

impl RunManifest {
    pub fn new(command: &str, arguments: Vec<String>, tolerances: Tolerances, seed: Option<u64>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            arguments,
            inputs: Vec::new(),
            tolerances,
            seed,
            outputs: Vec::new(),
            corrections: Vec::new(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(InputRecord {
            path: path.display().to_string(),
            hash: blob_hash(bytes),
        });
    }

    pub fn record_output(&mut self, path: &Path, bytes: &[u8]) {
        self.outputs.push(InputRecord {
            path: path.display().to_string(),
            hash: blob_hash(bytes),
        });
    }
}

/// `result.json` -> `result.manifest.json`.
pub fn manifest_path(result: &Path) -> PathBuf {
    sibling(result, "manifest")
}

/// `result.json` + `filter` -> `result.filter.json`.
pub fn sibling(out: &Path, tag: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "result".into());
    out.with_file_name(format!("{stem}.{tag}.json"))
}
