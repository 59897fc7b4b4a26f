use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use modelyap::classify::build_profiles;
use modelyap::ensemble::{EnsembleResult, ResultsDocument};

use super::{read_file, write_file};

/// Train per-(mode, family) profiles from results files.
pub fn build(result_files: &[PathBuf], out: &Path) -> Result<i32> {
    let mut results: Vec<EnsembleResult> = Vec::new();
    for file in result_files {
        let document = ResultsDocument::from_json(&read_file(file)?)
            .with_context(|| format!("loading {}", file.display()))?;
        results.extend(document.results);
    }
    let profiles = build_profiles(&results)?;
    write_file(out, &profiles.to_json()?)?;
    println!(
        "wrote {} ({} profiles, {} steps)",
        out.display(),
        profiles.profiles.len(),
        profiles.steps
    );
    Ok(0)
}
