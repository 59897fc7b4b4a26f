//! Experiment config file: a single JSON document, with every field
//! overridable from flags and the seed from `MODELYAP_SEED`.
//!
//! ```json
//! {
//!   "cipher": "tea",
//!   "modes": ["ecb", "cbc", "ofb", "cfb", "ctr", "pcbc"],
//!   "blocks": 5,
//!   "ensemble_size": 20,
//!   "steps": 60,
//!   "seed": 7,
//!   "perturbation": {"policy": "fixed-lsb"}
//! }
//! ```
//!
//! `cipher` is either a name (`"tea"`, `"xtea"`, `"aes128"`) or an object
//! `{"id": ..., "rounds": ..., "block_bits": ..., "key_bits": ...}`; `mode`
//! (single) may be used instead of `modes`. All modes of one run share the
//! seed, so ensembles are paired member-by-member across modes.

use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use modelyap::cipher::{CipherId, CipherSpec};
use modelyap::ensemble::ExperimentConfig;
use modelyap::lyapunov::PerturbationSpec;
use modelyap::mode::ModeId;

pub const SEED_ENV_VAR: &str = "MODELYAP_SEED";

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum CipherField {
    Name(String),
    Spec {
        id: String,
        block_bits: Option<u32>,
        key_bits: Option<u32>,
        rounds: Option<u32>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    cipher: CipherField,
    mode: Option<String>,
    modes: Option<Vec<String>>,
    blocks: usize,
    ensemble_size: Option<usize>,
    steps: Option<usize>,
    seed: Option<u64>,
    perturbation: Option<PerturbationSpec>,
}

/// Flag-level overrides, applied on top of file and environment.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub cipher: Option<String>,
    pub modes: Option<Vec<String>>,
    pub blocks: Option<usize>,
    pub ensemble_size: Option<usize>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
}

/// A resolved run: one `ExperimentConfig` per mode, shared seed.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub configs: Vec<ExperimentConfig>,
    pub seed: u64,
}

fn parse_cipher_name(name: &str) -> Result<CipherSpec> {
    let id = CipherId::from_str(name).with_context(|| format!("cipher {name:?}"))?;
    Ok(CipherSpec::by_id(id))
}

fn resolve_cipher(field: &CipherField) -> Result<CipherSpec> {
    match field {
        CipherField::Name(name) => parse_cipher_name(name),
        CipherField::Spec {
            id,
            block_bits,
            key_bits,
            rounds,
        } => {
            let mut spec = parse_cipher_name(id)?;
            if let Some(n) = block_bits {
                spec.block_bits = *n;
            }
            if let Some(k) = key_bits {
                spec.key_bits = *k;
            }
            if let Some(r) = rounds {
                spec.rounds = *r;
            }
            Ok(spec)
        }
    }
}

fn parse_modes(names: &[String]) -> Result<Vec<ModeId>> {
    let mut modes = Vec::with_capacity(names.len());
    for name in names {
        let mode = ModeId::from_str(name).with_context(|| format!("mode {name:?}"))?;
        if modes.contains(&mode) {
            bail!("mode {mode} listed twice");
        }
        modes.push(mode);
    }
    if modes.is_empty() {
        bail!("no modes selected");
    }
    Ok(modes)
}

fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV_VAR) {
        Ok(text) => {
            let seed = text
                .parse::<u64>()
                .with_context(|| format!("{SEED_ENV_VAR}={text:?} is not a 64-bit seed"))?;
            Ok(Some(seed))
        }
        Err(_) => Ok(None),
    }
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<ResolvedRun> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let file: FileConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))?;

    let cipher = match &overrides.cipher {
        Some(name) => parse_cipher_name(name)?,
        None => resolve_cipher(&file.cipher)?,
    };

    let mode_names: Vec<String> = if let Some(names) = &overrides.modes {
        names.clone()
    } else {
        match (&file.mode, &file.modes) {
            (Some(_), Some(_)) => bail!("config sets both \"mode\" and \"modes\""),
            (Some(one), None) => vec![one.clone()],
            (None, Some(many)) => many.clone(),
            (None, None) => bail!("config needs \"mode\" or \"modes\""),
        }
    };
    let modes = parse_modes(&mode_names)?;

    // precedence: flag > environment > file
    let seed = overrides
        .seed
        .or(seed_from_env()?)
        .or(file.seed)
        .context("no seed: set \"seed\" in the config, MODELYAP_SEED, or --seed")?;

    let blocks = overrides.blocks.unwrap_or(file.blocks);
    let ensemble_size = overrides
        .ensemble_size
        .or(file.ensemble_size)
        .unwrap_or(200);
    let steps = overrides.steps.or(file.steps).unwrap_or(200);
    let perturbation = file.perturbation.unwrap_or_default();

    let configs: Vec<ExperimentConfig> = modes
        .iter()
        .map(|&mode| ExperimentConfig {
            cipher,
            mode,
            blocks,
            ensemble_size,
            steps,
            rng_seed: seed,
            perturbation,
        })
        .collect();
    for config in &configs {
        config.validate()?;
    }
    Ok(ResolvedRun { configs, seed })
}
