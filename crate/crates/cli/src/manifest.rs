//! Run manifest: every output directory gets a record of the exact resolved
//! configuration, seed and tool version, so any output is reproducible from
//! its directory alone. The timestamp documents the run; all other output
//! files are byte-deterministic given the seed.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use modelyap::ensemble::ExperimentConfig;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub timestamp_utc: String,
    pub seed: u64,
    pub configs: Vec<ExperimentConfig>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, configs: Vec<ExperimentConfig>) -> Self {
        Self {
            tool: "modelyap",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            timestamp_utc: chrono::Utc::now().to_rfc3339(),
            seed,
            configs,
            outputs: Vec::new(),
        }
    }

    pub fn record(&mut self, path: &str) {
        self.outputs.push(path.to_string());
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let path = out_dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}
