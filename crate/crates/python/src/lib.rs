//! Python bindings: keyed ciphers, mode systems, divergence traces and the
//! ensemble/classification pipeline, driven from Python with hex strings and
//! plain lists. Build as a cdylib and import as `modelyap_py`; see
//! `python/smoke_test.py` for a tour.

use std::str::FromStr;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use modelyap::cipher::{self, CipherId, CipherSpec, Key};
use modelyap::classify;
use modelyap::ensemble::{self, ExperimentConfig};
use modelyap::error::Error;
use modelyap::kat;
use modelyap::lyapunov;
use modelyap::mode::{ModeContext, ModeId, SystemState};
use modelyap::BitBlock;

fn value_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_spec(
    cipher_id: &str,
    block_bits: Option<u32>,
    rounds: Option<u32>,
) -> PyResult<CipherSpec> {
    let id = CipherId::from_str(cipher_id).map_err(value_err)?;
    let mut spec = CipherSpec::by_id(id);
    if let Some(n) = block_bits {
        spec.block_bits = n;
        if matches!(id, CipherId::ToyXor) {
            spec.key_bits = n;
        }
    }
    if let Some(r) = rounds {
        spec.rounds = r;
    }
    Ok(spec)
}

fn parse_blocks(blocks: &[String], n: u32) -> PyResult<Vec<BitBlock>> {
    blocks
        .iter()
        .map(|s| BitBlock::from_hex(s, n).map_err(value_err))
        .collect()
}

/// A keyed block cipher working on hex-encoded blocks.
#[pyclass]
struct Cipher {
    inner: cipher::Cipher,
    spec: CipherSpec,
}

#[pymethods]
impl Cipher {
    /// Cipher ids: "tea", "xtea", "aes128", "toy-xor", "toy-perm".
    /// `block_bits` only applies to the toy ciphers (4..=16, multiple of 4
    /// for the hex interface).
    #[new]
    #[pyo3(signature = (cipher_id, key_hex, rounds=None, block_bits=None))]
    fn new(
        cipher_id: &str,
        key_hex: &str,
        rounds: Option<u32>,
        block_bits: Option<u32>,
    ) -> PyResult<Self> {
        let spec = parse_spec(cipher_id, block_bits, rounds)?;
        let key = Key::from_hex(key_hex, spec.key_bits).map_err(value_err)?;
        let inner = cipher::Cipher::new(&spec, &key).map_err(value_err)?;
        Ok(Self { inner, spec })
    }

    fn encrypt(&self, block_hex: &str) -> PyResult<String> {
        let block = BitBlock::from_hex(block_hex, self.spec.block_bits).map_err(value_err)?;
        Ok(self.inner.encrypt(block).to_hex())
    }

    fn decrypt(&self, block_hex: &str) -> PyResult<String> {
        let block = BitBlock::from_hex(block_hex, self.spec.block_bits).map_err(value_err)?;
        Ok(self.inner.decrypt(block).to_hex())
    }

    #[getter]
    fn block_bits(&self) -> u32 {
        self.spec.block_bits
    }

    #[getter]
    fn key_bits(&self) -> u32 {
        self.spec.key_bits
    }

    #[getter]
    fn rounds(&self) -> u32 {
        self.spec.rounds
    }

    fn __repr__(&self) -> String {
        format!(
            "Cipher(id={}, n={}, rounds={})",
            self.spec.id, self.spec.block_bits, self.spec.rounds
        )
    }
}

/// One divergence trace.
#[pyclass]
struct Trace {
    #[pyo3(get)]
    lambda_curve: Vec<f64>,
    #[pyo3(get)]
    ln_epsilon: Vec<f64>,
    #[pyo3(get)]
    lambda_m: f64,
    #[pyo3(get)]
    converged_at: Option<usize>,
    #[pyo3(get)]
    died_at: Option<usize>,
    #[pyo3(get)]
    epsilon_decimal: Vec<String>,
}

impl From<lyapunov::LyapunovTrace> for Trace {
    fn from(trace: lyapunov::LyapunovTrace) -> Self {
        Self {
            lambda_curve: trace.lambda.clone(),
            ln_epsilon: trace.ln_epsilon.clone(),
            lambda_m: trace.lambda_m,
            converged_at: trace.converged_at,
            died_at: trace.died_at,
            epsilon_decimal: trace.epsilon.iter().map(|e| e.to_string()).collect(),
        }
    }
}

#[pymethods]
impl Trace {
    #[getter]
    fn final_lambda(&self) -> f64 {
        *self.lambda_curve.last().expect("nonempty trace")
    }

    fn normalized(&self) -> Vec<f64> {
        self.lambda_curve
            .iter()
            .map(|l| l / self.lambda_m)
            .collect()
    }

    fn __len__(&self) -> usize {
        self.lambda_curve.len()
    }
}

/// A keyed mode of operation over hex-encoded multi-block states.
#[pyclass]
struct ModeSystem {
    ctx: ModeContext,
    block_bits: u32,
}

#[pymethods]
impl ModeSystem {
    /// Modes: "ecb", "cbc", "ofb", "cfb", "ctr", "pcbc".
    #[new]
    #[pyo3(signature = (cipher_id, key_hex, mode, rounds=None, block_bits=None))]
    fn new(
        cipher_id: &str,
        key_hex: &str,
        mode: &str,
        rounds: Option<u32>,
        block_bits: Option<u32>,
    ) -> PyResult<Self> {
        let spec = parse_spec(cipher_id, block_bits, rounds)?;
        let mode = ModeId::from_str(mode).map_err(value_err)?;
        let key = Key::from_hex(key_hex, spec.key_bits).map_err(value_err)?;
        let ctx = ModeContext::new(mode, &spec, &key).map_err(value_err)?;
        Ok(Self {
            ctx,
            block_bits: spec.block_bits,
        })
    }

    /// One application of the mode map. Returns (ciphertext blocks, next iv).
    fn encrypt_once(&self, blocks: Vec<String>, iv: &str) -> PyResult<(Vec<String>, String)> {
        let state = self.state(&blocks, iv)?;
        let out = self.ctx.encrypt_once(&state).map_err(value_err)?;
        Ok((
            out.blocks.iter().map(|b| b.to_hex()).collect(),
            out.iv.to_hex(),
        ))
    }

    /// Inverse of `encrypt_once` given the ciphertext and the original iv.
    fn decrypt_once(&self, blocks: Vec<String>, iv: &str) -> PyResult<Vec<String>> {
        let state = self.state(&blocks, iv)?;
        let out = self.ctx.decrypt_once(&state).map_err(value_err)?;
        Ok(out.blocks.iter().map(|b| b.to_hex()).collect())
    }

    /// Iterate the system `steps` times; returns the block lists at t = 1..=steps.
    fn iterate(&self, blocks: Vec<String>, iv: &str, steps: usize) -> PyResult<Vec<Vec<String>>> {
        let state = self.state(&blocks, iv)?;
        let trajectory = self.ctx.iterate(&state, steps).map_err(value_err)?;
        Ok(trajectory
            .iter()
            .map(|s| s.blocks.iter().map(|b| b.to_hex()).collect())
            .collect())
    }

    /// Defect-propagation trace from a plaintext with one bit flipped
    /// (`bit` is 1-based in block 1; defaults to the least significant).
    #[pyo3(signature = (blocks, iv, steps, bit=None))]
    fn lyapunov_curve(
        &self,
        blocks: Vec<String>,
        iv: &str,
        steps: usize,
        bit: Option<u32>,
    ) -> PyResult<Trace> {
        let state = self.state(&blocks, iv)?;
        let bit = bit.unwrap_or(self.block_bits);
        let trace = lyapunov::lyapunov_curve(&self.ctx, &state, bit, steps).map_err(value_err)?;
        Ok(trace.into())
    }
}

impl ModeSystem {
    fn state(&self, blocks: &[String], iv: &str) -> PyResult<SystemState> {
        let blocks = parse_blocks(blocks, self.block_bits)?;
        let iv = BitBlock::from_hex(iv, self.block_bits).map_err(value_err)?;
        SystemState::new(blocks, iv).map_err(value_err)
    }
}

/// Mean-field upper bound `ln(b·n)`.
#[pyfunction]
fn lambda_upper_bound(blocks: usize, block_bits: u32) -> f64 {
    lyapunov::lambda_upper_bound(blocks, block_bits)
}

/// Verify a KAT file text; returns (total, failure descriptions).
#[pyfunction]
fn verify_kat(text: &str) -> PyResult<(usize, Vec<String>)> {
    let report = kat::run_kat(text).map_err(value_err)?;
    let failures = report
        .failures
        .iter()
        .map(|f| format!("line {} ({}): {}", f.line, f.cipher, f.reason))
        .collect();
    Ok((report.total, failures))
}

/// Run one ensemble from an `ExperimentConfig` JSON document; returns the
/// `EnsembleResult` as JSON.
#[pyfunction]
fn run_ensemble_json(config_json: &str) -> PyResult<String> {
    let config: ExperimentConfig =
        serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let result = ensemble::run_ensemble(&config).map_err(value_err)?;
    serde_json::to_string(&result).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Train profiles from `EnsembleResult` JSON documents; returns the profile
/// store as JSON.
#[pyfunction]
fn build_profiles_json(result_jsons: Vec<String>) -> PyResult<String> {
    let results: Vec<ensemble::EnsembleResult> = result_jsons
        .iter()
        .map(|text| serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string())))
        .collect::<PyResult<_>>()?;
    let profiles = classify::build_profiles(&results).map_err(value_err)?;
    profiles.to_json().map_err(value_err)
}

/// Classify a normalized curve against a profile store (JSON); returns the
/// verdict as JSON.
#[pyfunction]
fn classify_json(profiles_json: &str, normalized_curve: Vec<f64>) -> PyResult<String> {
    let profiles = classify::ProfileSet::from_json(profiles_json).map_err(value_err)?;
    let verdict = classify::classify_normalized(&normalized_curve, &profiles).map_err(value_err)?;
    serde_json::to_string(&verdict).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn modelyap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Cipher>()?;
    m.add_class::<ModeSystem>()?;
    m.add_class::<Trace>()?;
    m.add_function(wrap_pyfunction!(lambda_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(verify_kat, m)?)?;
    m.add_function(wrap_pyfunction!(run_ensemble_json, m)?)?;
    m.add_function(wrap_pyfunction!(build_profiles_json, m)?)?;
    m.add_function(wrap_pyfunction!(classify_json, m)?)?;
    Ok(())
}
