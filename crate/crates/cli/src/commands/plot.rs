use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use modelyap::ensemble::ResultsDocument;
use modelyap::svg::{render_normalized_curves, CurveSeries};

use super::{read_file, write_file};

/// Render the normalized mean curves of one or more results files into a
/// single SVG figure.
pub fn execute(result_files: &[PathBuf], out: &Path, title: Option<&str>) -> Result<i32> {
    let mut series = Vec::new();
    for file in result_files {
        let document = ResultsDocument::from_json(&read_file(file)?)
            .with_context(|| format!("loading {}", file.display()))?;
        for result in &document.results {
            series.push(CurveSeries {
                label: format!(
                    "{}/{} b={}",
                    result.config.cipher.id, result.config.mode, result.config.blocks
                ),
                values: result.normalized_mean_curve(),
            });
        }
    }
    let title = title.unwrap_or("normalized divergence rate");
    let svg = render_normalized_curves(&series, title)?;
    write_file(out, &svg)?;
    println!("wrote {}", out.display());
    Ok(0)
}
