use std::path::Path;

use anyhow::{Context, Result};

use modelyap::classify::{classify_normalized, ProfileSet};
use modelyap::error::Error;

use super::{read_file, read_normalized_trace, write_file};

/// Classify one trace CSV against a profile store. Prints the verdict and
/// optionally writes it as JSON. Incompatible traces exit with code 2.
pub fn execute(profiles_path: &Path, trace_path: &Path, json_out: Option<&Path>) -> Result<i32> {
    let profiles = ProfileSet::from_json(&read_file(profiles_path)?)
        .with_context(|| format!("loading {}", profiles_path.display()))?;
    let curve = read_normalized_trace(trace_path)?;
    let verdict = match classify_normalized(&curve, &profiles) {
        Ok(verdict) => verdict,
        Err(Error::Dimension(message)) => {
            eprintln!("error: incompatible trace: {message}");
            return Ok(2);
        }
        Err(e) => return Err(e.into()),
    };
    let predicted: Vec<&str> = verdict.predicted.iter().map(|m| m.as_str()).collect();
    println!("predicted: {}", predicted.join("+"));
    println!("family: {}", verdict.family);
    println!("distance: {}", verdict.distance);
    println!("runner_up_margin: {}", verdict.runner_up_margin);
    if let Some(path) = json_out {
        write_file(path, &serde_json::to_string_pretty(&verdict)?)?;
    }
    Ok(0)
}
