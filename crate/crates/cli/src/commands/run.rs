use std::path::Path;

use anyhow::{Context, Result};

use modelyap::ensemble::{run_ensemble_traces, EnsembleResult, ResultsDocument};
use modelyap::lyapunov::{write_epsilon_decimal, write_trace_csv, LyapunovTrace};
use modelyap::mode::{write_trajectory_csv, ModeContext, SystemState};

use super::write_file;
use crate::config::ResolvedRun;
use crate::manifest::RunManifest;

pub struct RunOptions {
    pub dump_trajectory: bool,
    pub dump_epsilon: bool,
}

/// Run one ensemble per mode and write the results tree:
/// `results.json`, `members/<mode>/member_NNN.csv`, `manifest.json`.
pub fn execute(run: &ResolvedRun, out_dir: &Path, options: &RunOptions) -> Result<i32> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut manifest = RunManifest::new("run", run.seed, run.configs.clone());

    let mut results: Vec<EnsembleResult> = Vec::with_capacity(run.configs.len());
    for config in &run.configs {
        log::info!(
            "running {}/{}: b={}, ensemble={}, T={}",
            config.cipher.id,
            config.mode,
            config.blocks,
            config.ensemble_size,
            config.steps
        );
        let (result, traces) = run_ensemble_traces(config)?;
        write_member_files(
            out_dir,
            &mut manifest,
            config.mode.as_str(),
            &traces,
            options,
        )?;
        if options.dump_trajectory {
            write_reference_trajectory(out_dir, &mut manifest, config)?;
        }
        results.push(result);
    }

    let document = ResultsDocument::new(results)?;
    write_file(&out_dir.join("results.json"), &document.to_json()?)?;
    manifest.record("results.json");
    manifest.write(out_dir)?;
    println!("wrote {}", out_dir.join("results.json").display());
    Ok(0)
}

fn write_member_files(
    out_dir: &Path,
    manifest: &mut RunManifest,
    mode: &str,
    traces: &[LyapunovTrace],
    options: &RunOptions,
) -> Result<()> {
    for (i, trace) in traces.iter().enumerate() {
        let rel = format!("members/{mode}/member_{i:03}.csv");
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, trace)?;
        write_file(&out_dir.join(&rel), std::str::from_utf8(&buf)?)?;
        manifest.record(&rel);
        if options.dump_epsilon {
            let rel = format!("members/{mode}/member_{i:03}_epsilon.csv");
            let mut buf = Vec::new();
            write_epsilon_decimal(&mut buf, trace)?;
            write_file(&out_dir.join(&rel), std::str::from_utf8(&buf)?)?;
            manifest.record(&rel);
        }
    }
    Ok(())
}

/// Dump member 0's reference trajectory for inspection.
fn write_reference_trajectory(
    out_dir: &Path,
    manifest: &mut RunManifest,
    config: &modelyap::ensemble::ExperimentConfig,
) -> Result<()> {
    let member = modelyap::ensemble::generate_dataset(config)?
        .into_iter()
        .next()
        .context("empty dataset")?;
    let ctx = ModeContext::new(config.mode, &config.cipher, &member.key)?;
    let state = SystemState::new(member.plaintext, member.iv)?;
    let trajectory = ctx.iterate(&state, config.steps)?;
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, &state, &trajectory)?;
    let rel = format!("members/{}/trajectory_member_000.csv", config.mode);
    write_file(&out_dir.join(&rel), std::str::from_utf8(&buf)?)?;
    manifest.record(&rel);
    Ok(())
}
