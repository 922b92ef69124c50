//! Run manifests: one JSON file per command invocation recording the resolved
//! arguments, parameters, and SHA-256 of every input and output, so a run can
//! be replayed and checked bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, with environment defaults made explicit.
    pub args: Vec<String>,
    pub cwd: PathBuf,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

impl RunManifest {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

/// Collects what a command read, wrote, and resolved while it runs.
#[derive(Debug, Default)]
pub struct Run {
    config: BTreeMap<String, String>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    manifest_path: Option<PathBuf>,
}

impl Run {
    pub fn config(&mut self, key: &str, value: impl ToString) {
        self.config.insert(key.to_string(), value.to_string());
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn set_manifest_path(&mut self, path: PathBuf) {
        self.manifest_path = Some(path);
    }

    pub fn finish(self, command: &str, args: Vec<String>, started: u128) -> anyhow::Result<PathBuf> {
        let path = self.manifest_path.context("command did not choose a manifest location")?;
        let hash_all = |paths: &[PathBuf]| -> anyhow::Result<Vec<FileRecord>> {
            paths
                .iter()
                .map(|p| Ok(FileRecord { path: p.clone(), sha256: sha256_file(p)? }))
                .collect()
        };
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            args,
            cwd: std::env::current_dir()?,
            config: self.config,
            inputs: hash_all(&self.inputs)?,
            outputs: hash_all(&self.outputs)?,
            started_unix_ms: started,
            finished_unix_ms: now_ms(),
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing manifest {}", path.display()))?;
        Ok(path)
    }
}

/// `<file>.manifest.json` next to a single-file output.
pub fn beside(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}
