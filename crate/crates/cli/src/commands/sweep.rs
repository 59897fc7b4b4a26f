use std::path::Path;

use anyhow::{Context, Result};

use modelyap::ensemble::{
    fit_lambda_vs_blocks, run_ensemble, BlockRegression, EnsembleResult, ResultsDocument,
};
use modelyap::mode::ModeId;

use super::write_file;
use crate::config::ResolvedRun;
use crate::manifest::RunManifest;

pub const SWEEP_BLOCKS: [usize; 6] = [2, 4, 8, 12, 16, 20];

/// Re-run each configured mode across the block-count ladder and fit the
/// final divergence rate against `ln(b)` per mode.
pub fn execute(run: &ResolvedRun, out_dir: &Path) -> Result<i32> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut all_results: Vec<EnsembleResult> = Vec::new();
    let mut regressions: Vec<BlockRegression> = Vec::new();
    let mut manifest_configs = Vec::new();

    for base in &run.configs {
        let mode: ModeId = base.mode;
        let mut points: Vec<(usize, f64)> = Vec::with_capacity(SWEEP_BLOCKS.len());
        for &blocks in &SWEEP_BLOCKS {
            let mut config = base.clone();
            config.blocks = blocks;
            log::info!("sweep {}/{mode}: b={blocks}", config.cipher.id);
            let result = run_ensemble(&config)?;
            points.push((blocks, result.mean_final()));
            manifest_configs.push(config);
            all_results.push(result);
        }
        let fit = fit_lambda_vs_blocks(&points)?;
        regressions.push(BlockRegression { mode, points, fit });
    }

    let mut document = ResultsDocument::new(all_results)?;
    // pairwise tests across block counts are meaningless; keep per-mode fits only
    document.mode_pair_tests.clear();
    document.block_regressions = regressions;
    write_file(&out_dir.join("results.json"), &document.to_json()?)?;

    let mut manifest = RunManifest::new("sweep-blocks", run.seed, manifest_configs);
    manifest.record("results.json");
    manifest.write(out_dir)?;

    for regression in &document.block_regressions {
        println!(
            "{}: lambda ~ {:.4}*ln(b) + {:.4}  (R^2 = {:.4})",
            regression.mode, regression.fit.alpha, regression.fit.beta, regression.fit.r_squared
        );
    }
    Ok(0)
}
