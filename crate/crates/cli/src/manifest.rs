//! Run directories: every command writes its artifacts under one
//! directory together with a `manifest.json`.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::HarnessConfig;
use crate::error::CliResult;

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    created_unix: u64,
    inputs: &'a [String],
    outputs: &'a [String],
    config: &'a HarnessConfig,
}

#[derive(Debug)]
pub struct RunDir {
    root: PathBuf,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

impl RunDir {
    pub fn create(root: impl Into<PathBuf>) -> CliResult<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root)?;
        Ok(Self { root, inputs: Vec::new(), outputs: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Path for an artifact, recorded in the manifest.
    pub fn output(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.root.join(name)
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    pub fn finish(&self, command: &str, cfg: &HarnessConfig) -> CliResult<PathBuf> {
        let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let m = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seed: cfg.seed,
            created_unix,
            inputs: &self.inputs,
            outputs: &self.outputs,
            config: cfg,
        };
        let path = self.root.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&m)?)?;
        Ok(path)
    }
}
