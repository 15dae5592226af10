use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::experiments::{Check, RunRecord};
use crate::error::Result;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Exit codes of `run`.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOW_UP: i32 = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

impl OutputFile {
    pub fn of(name: &str, bytes: &[u8]) -> Self {
        Self { name: name.to_string(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Versions {
    pub eulerlab: String,
    pub threads: usize,
    pub parallel: bool,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            eulerlab: env!("CARGO_PKG_VERSION").to_string(),
            threads: crate::par::threads(),
            parallel: cfg!(feature = "parallel"),
        }
    }
}

/// JSON record written next to every run's outputs, also when the run
/// aborts. `wall_clock_seconds`, `started_unix` and `versions.threads` are
/// the only fields that vary between identical runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub seed: u64,
    /// The configuration as TOML, after defaults were applied.
    pub config: String,
    pub versions: Versions,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    pub runs: Vec<RunRecord>,
    pub checks: Vec<Check>,
    pub outputs: Vec<OutputFile>,
    pub exit_code: i32,
    pub error: Option<String>,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(dir.join(MANIFEST_FILE), text)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn output(&self, name: &str) -> Option<&OutputFile> {
        self.outputs.iter().find(|o| o.name == name)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
