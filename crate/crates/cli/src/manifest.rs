//! Run manifests: everything needed to audit or reproduce a finished (or
//! failed) experiment. The manifest embeds the full config snapshot, the
//! seeds each stage actually used, wall-clock timings, and a SHA-256 stamp
//! of every data file written. Re-running the embedded config reproduces
//! the data files byte for byte; only the timings differ.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::formats::atomic_write;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputStamp {
    /// File name relative to the run directory.
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub rng_algorithm: String,
    /// "ok" or "failed".
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub master_seed: u64,
    pub config: ExperimentConfig,
    /// Stage label to the seed that stage consumed.
    pub derived_seeds: BTreeMap<String, u64>,
    pub timings: Vec<StageTiming>,
    /// Logical output name ("field", "stats", ...) to file stamp.
    pub outputs: BTreeMap<String, OutputStamp>,
    /// Check-name to verdict summaries from the audit stages, when run.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub verdicts: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

pub fn stamp_file(dir: &Path, file: &str) -> Result<OutputStamp> {
    let bytes = fs::read(dir.join(file)).with_context(|| format!("stamping {file}"))?;
    Ok(OutputStamp { file: file.to_string(), sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 })
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let text = crate::report::to_json_file(self)?;
        atomic_write(&dir.join(MANIFEST_FILE), text.as_bytes())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Confirms every stamped output still hashes to its recorded digest.
    pub fn verify_outputs(&self, dir: &Path) -> Result<()> {
        for (name, stamp) in &self.outputs {
            let fresh = stamp_file(dir, &stamp.file)?;
            if fresh.sha256 != stamp.sha256 {
                anyhow::bail!("output {name} ({}) does not match its manifest stamp", stamp.file);
            }
        }
        Ok(())
    }
}
