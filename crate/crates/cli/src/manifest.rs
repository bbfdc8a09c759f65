//! Run manifests, output locking and the reproduce check.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST: &str = "manifest.json";
pub const CONFIG_COPY: &str = "config.json";
const LOCK: &str = ".polarity.lock";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmittedFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub name: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u64,
    pub command: String,
    pub tool_version: String,
    /// Absolute path of the config the run was started with.
    pub config_path: String,
    pub config_sha256: String,
    pub seed: u64,
    pub seed_override: Option<u64>,
    pub started: String,
    pub finished: String,
    pub threads: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub files: Vec<EmittedFile>,
    pub exit_code: i32,
    pub error: Option<ErrorRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp)?;
    f.write_all(contents)?;
    f.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Exclusive claim on an output directory, released on drop.
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(LOCK);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Locked(dir.display().to_string())),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

pub fn read(path: &Path) -> Result<RunManifest, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::ManifestMismatch(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::ManifestMismatch(format!("malformed manifest: {e}")))
}

fn close(a: f64, b: f64, rtol: f64) -> bool {
    a == b || (a - b).abs() <= rtol * a.abs().max(b.abs())
}

/// Compares two JSON trees, numbers up to `rtol`. Returns the first differing path.
pub fn compare_json(a: &Value, b: &Value, rtol: f64, path: &str) -> Option<String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            (!close(x, y, rtol)).then(|| format!("{path}: {x} vs {y}"))
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Some(format!("{path}: length {} vs {}", x.len(), y.len()));
            }
            x.iter().zip(y).enumerate().find_map(|(i, (p, q))| compare_json(p, q, rtol, &format!("{path}[{i}]")))
        }
        (Value::Object(x), Value::Object(y)) => {
            if x.len() != y.len() || x.keys().any(|k| !y.contains_key(k)) {
                return Some(format!("{path}: different keys"));
            }
            x.iter().find_map(|(k, v)| compare_json(v, &y[k], rtol, &format!("{path}.{k}")))
        }
        _ => (a != b).then(|| format!("{path}: {a} vs {b}")),
    }
}

/// Compares two CSV documents cell by cell, numeric cells up to `rtol`.
pub fn compare_csv(a: &str, b: &str, rtol: f64) -> Option<String> {
    let la: Vec<&str> = a.lines().collect();
    let lb: Vec<&str> = b.lines().collect();
    if la.len() != lb.len() {
        return Some(format!("{} rows vs {}", la.len(), lb.len()));
    }
    for (i, (x, y)) in la.iter().zip(&lb).enumerate() {
        let cx: Vec<&str> = x.split(',').collect();
        let cy: Vec<&str> = y.split(',').collect();
        if cx.len() != cy.len() {
            return Some(format!("row {i}: column count differs"));
        }
        for (p, q) in cx.iter().zip(&cy) {
            let same = match (p.parse::<f64>(), q.parse::<f64>()) {
                (Ok(u), Ok(v)) => close(u, v, rtol),
                _ => p == q,
            };
            if !same {
                return Some(format!("row {i}: {p} vs {q}"));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn json_comparison_uses_relative_tolerance() {
        let a = json!({"x": [1.0, 2.0], "s": "ok"});
        assert!(compare_json(&a, &json!({"x": [1.0, 2.0 + 1e-12], "s": "ok"}), 1e-9, "").is_none());
        assert!(compare_json(&a, &json!({"x": [1.0, 2.1], "s": "ok"}), 1e-9, "").is_some());
        assert!(compare_json(&a, &json!({"x": [1.0, 2.0], "s": "no"}), 1e-9, "").is_some());
    }

    #[test]
    fn csv_comparison() {
        assert!(compare_csv("a,b\n1,2\n", "a,b\n1,2.0000000000001\n", 1e-9).is_none());
        assert!(compare_csv("a,b\n1,2\n", "a,b\n1,3\n", 1e-9).is_some());
    }

    #[test]
    fn second_lock_fails() {
        let dir = tempfile::tempdir().unwrap();
        let first = DirLock::acquire(dir.path()).unwrap();
        assert!(matches!(DirLock::acquire(dir.path()), Err(CliError::Locked(_))));
        drop(first);
        assert!(DirLock::acquire(dir.path()).is_ok());
    }
}
