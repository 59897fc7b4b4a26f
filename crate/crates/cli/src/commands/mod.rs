pub mod classify;
pub mod kat;
pub mod plot;
pub mod profiles;
pub mod run;
pub mod sweep;

use anyhow::{Context, Result};
use std::path::Path;

pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Parse a trace CSV (`t, ln_epsilon, lambda, lambda_normalized`) into its
/// normalized curve.
pub(crate) fn read_normalized_trace(path: &Path) -> Result<Vec<f64>> {
    let text = read_file(path)?;
    let mut lines = text.lines();
    let header = lines.next().context("empty trace file")?;
    if header.trim() != "t,ln_epsilon,lambda,lambda_normalized" {
        anyhow::bail!("unexpected trace header {header:?}");
    }
    let mut curve = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            anyhow::bail!(
                "trace line {}: expected 4 fields, got {}",
                i + 2,
                fields.len()
            );
        }
        let value: f64 = fields[3]
            .trim()
            .parse()
            .with_context(|| format!("trace line {}: bad normalized value", i + 2))?;
        curve.push(value);
    }
    Ok(curve)
}
