use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub seconds: f64,
    /// Named margins; a check passes when its margin is nonnegative.
    pub margins: BTreeMap<String, f64>,
    /// Measured quantities reported alongside, never judged.
    pub measured: BTreeMap<String, f64>,
    pub detail: String,
}

impl SuiteResult {
    pub fn new(name: &str) -> Self {
        SuiteResult {
            name: name.to_string(),
            passed: true,
            seconds: 0.0,
            margins: BTreeMap::new(),
            measured: BTreeMap::new(),
            detail: String::new(),
        }
    }

    /// Records `margin` under `key` and fails the suite when it is negative or NaN.
    pub fn check(&mut self, key: &str, margin: f64) {
        if !(margin >= 0.0) {
            self.passed = false;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(&format!("{key} violated (margin {margin:e})"));
        }
        self.margins.insert(key.to_string(), margin);
    }

    pub fn note(&mut self, key: &str, value: f64) {
        self.measured.insert(key.to_string(), value);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl Manifest {
    pub fn new(config_text: &str) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            started_unix: unix_now(),
            finished_unix: 0,
            passed: true,
            suites: Vec::new(),
        }
    }

    pub fn push(&mut self, result: SuiteResult) {
        self.passed &= result.passed;
        self.suites.push(result);
    }

    pub fn finish(&mut self) {
        self.finished_unix = unix_now();
        self.passed = self.suites.iter().all(|s| s.passed);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json().as_bytes())
    }
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
