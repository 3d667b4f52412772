//! Command-line workbench for steering assemblages.
//!
//! Results go to stdout as JSON, or with `--out PATH` to `PATH` together
//! with sibling artifacts (`<stem>.<tag>.json`) and a run manifest
//! (`<stem>.manifest.json`).

pub mod cli;
pub mod commands;
pub mod manifest;

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

use commands::{Outcome, Report, Settings};
use manifest::{manifest_path, sibling, RunManifest};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: steerkit_core::Error,
    },
    #[error(transparent)]
    Core(#[from] steerkit_core::Error),
    #[error("{0}")]
    Usage(String),
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s.into_bytes()
}

/// Writes a report and its manifest. Without `--out` everything, the
/// manifest included, is printed to stdout as one JSON document.
pub fn emit(report: Report, settings: &Settings, arguments: Vec<String>) -> Result<Outcome, CliError> {
    let mut manifest = RunManifest::new(report.command, arguments, settings.tol, Some(settings.seed));
    for (path, bytes) in &report.inputs {
        manifest.record_input(path, bytes);
    }
    manifest.corrections = report.corrections.clone();

    for (path, text) in &report.files {
        write(path, text.as_bytes())?;
        manifest.record_output(path, text.as_bytes());
    }
    let Some(out) = settings.out.as_deref() else {
        let mut doc = report.result;
        if let Value::Object(map) = &mut doc {
            for (tag, value) in report.artifacts {
                map.insert(tag.into(), value);
            }
            map.insert("manifest".into(), serde_json::to_value(&manifest).expect("manifest serializes"));
        }
        print!("{}", String::from_utf8(pretty(&doc)).expect("utf-8"));
        eprintln!("{}", report.summary);
        return Ok(report.outcome);
    };

    let result_path = if out.is_dir() {
        out.join(format!("{}.json", report.command))
    } else {
        out.to_path_buf()
    };
    let manifest_file = manifest_path(&result_path);
    let manifest_ref = json!(file_name(&manifest_file));
    let mut doc = report.result;
    let mut artifact_names = serde_json::Map::new();
    for (tag, mut value) in report.artifacts {
        let path = sibling(&result_path, tag);
        value["manifest"] = manifest_ref.clone();
        let bytes = pretty(&value);
        write(&path, &bytes)?;
        manifest.record_output(&path, &bytes);
        artifact_names.insert(tag.into(), json!(file_name(&path)));
    }
    if !artifact_names.is_empty() {
        doc["artifacts"] = Value::Object(artifact_names);
    }
    doc["manifest"] = manifest_ref;
    let bytes = pretty(&doc);
    write(&result_path, &bytes)?;
    manifest.record_output(&result_path, &bytes);
    let bytes = pretty(&serde_json::to_value(&manifest).expect("manifest serializes"));
    write(&manifest_file, &bytes)?;
    eprintln!("{}", report.summary);
    Ok(report.outcome)
}
