#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

pub fn tools_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../tools")
}

fn python() -> String {
    std::env::var("STEERKIT_PYTHON").unwrap_or_else(|_| "python3".into())
}

fn run_tool(script: &str, args: &[&Path], extra: &[&str]) -> Vec<Value> {
    let out = Command::new(python())
        .arg(tools_dir().join(script))
        .args(args)
        .args(extra)
        .output()
        .unwrap_or_else(|e| panic!("cannot run python for {script}: {e}"));
    assert!(
        out.status.success(),
        "{script} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

/// External objectives `c·x` for SDPA files, solved with cvxpy/Clarabel.
pub fn external_objectives(files: &[&Path]) -> Vec<f64> {
    run_tool("sdpa_oracle.py", files, &[])
        .into_iter()
        .map(|v| {
            assert_eq!(v["status"], "optimal", "{v}");
            v["objective"].as_f64().unwrap()
        })
        .collect()
}

/// LP bracket `(lower, upper)` on SR of a real qubit assemblage file.
pub fn lp_bracket(file: &Path) -> (f64, f64) {
    let v = &run_tool("lhs_lp_oracle.py", &[file], &[])[0];
    (v["lower"].as_f64().unwrap(), v["upper"].as_f64().unwrap())
}
