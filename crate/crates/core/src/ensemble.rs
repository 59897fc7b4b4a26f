//! Reproducible experiment datasets, ensemble runs and aggregate statistics.
//!
//! A dataset is drawn from a single seeded stream, so a config plus seed pins
//! every key, chaining value, plaintext and perturbation position. Ensemble
//! members are independent and run in parallel; aggregation happens
//! afterwards in fixed member order, which keeps floating-point sums
//! reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::bits::BitBlock;
use crate::cipher::{registered_weak_keys, CipherSpec, Key};
use crate::error::{Error, Result};
use crate::lyapunov::{
    lambda_upper_bound, lyapunov_curve, LyapunovTrace, PerturbationSpec, CONVERGENCE_EPSILON,
};
use crate::mode::{ModeContext, ModeId, SystemState};

/// A reproducible run description for one (cipher, mode) ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub cipher: CipherSpec,
    pub mode: ModeId,
    /// Number of blocks `b` per plaintext.
    pub blocks: usize,
    #[serde(default = "default_ensemble_size")]
    pub ensemble_size: usize,
    /// Time horizon `T`.
    #[serde(default = "default_steps")]
    pub steps: usize,
    pub rng_seed: u64,
    #[serde(default)]
    pub perturbation: PerturbationSpec,
}

fn default_ensemble_size() -> usize {
    200
}

fn default_steps() -> usize {
    200
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.blocks == 0 {
            return Err(Error::InvalidParameter("blocks must be >= 1".into()));
        }
        if self.ensemble_size < 2 {
            return Err(Error::InvalidParameter("ensemble_size must be >= 2".into()));
        }
        if self.steps < 2 {
            return Err(Error::InvalidParameter("steps must be >= 2".into()));
        }
        if let PerturbationSpec::FixedBit { bit } = self.perturbation {
            if !(1..=self.cipher.block_bits).contains(&bit) {
                return Err(Error::InvalidParameter(format!(
                    "perturbation bit {bit} out of [1, {}]",
                    self.cipher.block_bits
                )));
            }
        }
        Ok(())
    }

    pub fn lambda_m(&self) -> f64 {
        lambda_upper_bound(self.blocks, self.cipher.block_bits)
    }
}

/// One generated ensemble member.
#[derive(Clone, Debug)]
pub struct DatasetMember {
    pub key: Key,
    pub iv: BitBlock,
    pub plaintext: Vec<BitBlock>,
    /// Resolved 1-based perturbation bit in block 1.
    pub perturb_bit: u32,
}

const WEAK_KEY_RETRIES: usize = 1000;

/// Draw `ensemble_size` members from the seeded stream. Keys are pairwise
/// distinct and never in the cipher's registered weak-key list.
pub fn generate_dataset(config: &ExperimentConfig) -> Result<Vec<DatasetMember>> {
    config.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(config.rng_seed);
    let weak = registered_weak_keys(config.cipher.id);
    let mut seen = std::collections::HashSet::new();
    let mut members = Vec::with_capacity(config.ensemble_size);
    for member in 0..config.ensemble_size {
        let mut key = Key::random(&mut rng, config.cipher.key_bits);
        let mut retries = 0;
        while weak.contains(&key.value()) || !seen.insert(key.value()) {
            retries += 1;
            if retries > WEAK_KEY_RETRIES {
                return Err(Error::Generation(format!(
                    "no acceptable key found for member {member} after {WEAK_KEY_RETRIES} retries"
                )));
            }
            key = Key::random(&mut rng, config.cipher.key_bits);
        }
        let iv = BitBlock::random(&mut rng, config.cipher.block_bits);
        let plaintext = (0..config.blocks)
            .map(|_| BitBlock::random(&mut rng, config.cipher.block_bits))
            .collect();
        let perturb_bit = config
            .perturbation
            .resolve(config.cipher.block_bits, &mut rng);
        members.push(DatasetMember {
            key,
            iv,
            plaintext,
            perturb_bit,
        });
    }
    Ok(members)
}

/// Aggregates of one ensemble run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub config: ExperimentConfig,
    pub lambda_m: f64,
    /// Mean `λ(t)` over complete members, `t = 1..=steps`.
    pub mean_lambda: Vec<f64>,
    /// Sample standard deviation of the final-step `λ` over complete members.
    pub sigma_final: f64,
    /// `max − min` of the final-step `λ` over complete members.
    pub delta_final: f64,
    /// Final-step `λ` per complete member, in member order.
    pub member_final: Vec<f64>,
    /// Full `λ(t)` curve per member; defect-death truncates a curve early.
    pub member_curves: Vec<Vec<f64>>,
    /// Member indices whose defects died out (excluded from aggregates).
    pub excluded_members: Vec<usize>,
    /// Whether the mean curve meets the convergence criterion at the horizon.
    pub converged: bool,
}

impl EnsembleResult {
    pub fn mean_final(&self) -> f64 {
        *self.mean_lambda.last().expect("nonempty curve")
    }

    /// Normalized complete member curves, `λ(t)/λ_m`.
    pub fn normalized_member_curves(&self) -> Vec<Vec<f64>> {
        self.complete_member_curves()
            .map(|c| c.iter().map(|l| l / self.lambda_m).collect())
            .collect()
    }

    pub fn normalized_mean_curve(&self) -> Vec<f64> {
        self.mean_lambda.iter().map(|l| l / self.lambda_m).collect()
    }

    fn complete_member_curves(&self) -> impl Iterator<Item = &Vec<f64>> {
        let steps = self.config.steps;
        self.member_curves.iter().filter(move |c| c.len() == steps)
    }
}

/// Run the full ensemble for one config, keeping the member traces.
pub fn run_ensemble_traces(
    config: &ExperimentConfig,
) -> Result<(EnsembleResult, Vec<LyapunovTrace>)> {
    let dataset = generate_dataset(config)?;
    let traces: Vec<LyapunovTrace> = dataset
        .par_iter()
        .map(|member| -> Result<LyapunovTrace> {
            let ctx = ModeContext::new(config.mode, &config.cipher, &member.key)?;
            let state = SystemState::new(member.plaintext.clone(), member.iv)?;
            lyapunov_curve(&ctx, &state, member.perturb_bit, config.steps)
        })
        .collect::<Result<_>>()?;
    let result = summarize(config, &traces)?;
    Ok((result, traces))
}

/// Run the full ensemble for one config.
pub fn run_ensemble(config: &ExperimentConfig) -> Result<EnsembleResult> {
    run_ensemble_traces(config).map(|(result, _)| result)
}

/// Aggregate already-computed member traces.
pub fn summarize(config: &ExperimentConfig, traces: &[LyapunovTrace]) -> Result<EnsembleResult> {
    let mut member_curves = Vec::with_capacity(traces.len());
    let mut excluded = Vec::new();
    for (i, trace) in traces.iter().enumerate() {
        if let Some(t) = trace.died_at {
            log::warn!(
                "member {i} of {}/{} lost all defects at t={t}; excluded from aggregates",
                config.cipher.id,
                config.mode
            );
            excluded.push(i);
            // keep the finite prefix of the curve
            member_curves.push(trace.lambda[..trace.lambda.len() - 1].to_vec());
        } else {
            member_curves.push(trace.lambda.clone());
        }
    }
    let complete: Vec<&Vec<f64>> = member_curves
        .iter()
        .filter(|c| c.len() == config.steps)
        .collect();
    if complete.is_empty() {
        return Err(Error::Statistics(
            "every member trace died; nothing to aggregate".into(),
        ));
    }
    let mut mean_lambda = vec![0.0; config.steps];
    for curve in &complete {
        for (acc, v) in mean_lambda.iter_mut().zip(curve.iter()) {
            *acc += v;
        }
    }
    for acc in &mut mean_lambda {
        *acc /= complete.len() as f64;
    }
    let member_final: Vec<f64> = complete.iter().map(|c| *c.last().unwrap()).collect();
    let mean_final = *mean_lambda.last().unwrap();
    let sigma_final = if member_final.len() > 1 {
        let ss: f64 = member_final.iter().map(|v| (v - mean_final).powi(2)).sum();
        (ss / (member_final.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    let max = member_final.iter().cloned().fold(f64::MIN, f64::max);
    let min = member_final.iter().cloned().fold(f64::MAX, f64::min);
    let converged = config.steps >= 2
        && (mean_lambda[config.steps - 1] - mean_lambda[config.steps - 2]).abs()
            < CONVERGENCE_EPSILON;
    Ok(EnsembleResult {
        config: config.clone(),
        lambda_m: config.lambda_m(),
        mean_lambda,
        sigma_final,
        delta_final: max - min,
        member_final,
        member_curves,
        excluded_members: excluded,
        converged,
    })
}

/// Paired two-sided Student t-test.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub p: f64,
    pub df: f64,
}

pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "paired samples differ in size: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InvalidParameter(
            "paired t-test needs at least 2 pairs".into(),
        ));
    }
    let n = a.len() as f64;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let df = n - 1.0;
    if var == 0.0 {
        // degenerate: identical differences everywhere
        return Ok(if mean == 0.0 {
            TTest { t: 0.0, p: 1.0, df }
        } else {
            TTest {
                t: mean.signum() * f64::INFINITY,
                p: 0.0,
                df,
            }
        });
    }
    let t = mean / (var / n).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::Statistics(format!("t-distribution: {e}")))?;
    let p = 2.0 * dist.sf(t.abs());
    Ok(TTest { t, p, df })
}

/// Fraction of `a`'s member curves lying inside `b`'s pointwise [min, max]
/// envelope at every step of the post-transient window `t ∈ (T/4, T]`.
pub fn envelope_containment(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter(
            "envelope check needs non-empty curve sets".into(),
        ));
    }
    let steps = b[0].len();
    if a.iter().chain(b).any(|c| c.len() != steps) {
        return Err(Error::Dimension("curves must share one horizon".into()));
    }
    let cut = steps / 4;
    let mut lo = vec![f64::MAX; steps];
    let mut hi = vec![f64::MIN; steps];
    for curve in b {
        for (t, &v) in curve.iter().enumerate() {
            lo[t] = lo[t].min(v);
            hi[t] = hi[t].max(v);
        }
    }
    let inside = a
        .iter()
        .filter(|curve| (cut..steps).all(|t| lo[t] <= curve[t] && curve[t] <= hi[t]))
        .count();
    Ok(inside as f64 / a.len() as f64)
}

/// Least-squares fit of `λ = α·ln(b) + β`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RegressionFit {
    pub alpha: f64,
    pub beta: f64,
    pub r_squared: f64,
}

pub fn fit_lambda_vs_blocks(points: &[(usize, f64)]) -> Result<RegressionFit> {
    let distinct: std::collections::BTreeSet<usize> = points.iter().map(|(b, _)| *b).collect();
    if distinct.len() < 3 {
        return Err(Error::Regression(format!(
            "need at least 3 distinct block counts, got {}",
            distinct.len()
        )));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(b, _)| (*b as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, l)| *l).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Regression(
            "block counts are collinear in ln(b)".into(),
        ));
    }
    let alpha = sxy / sxx;
    let beta = my - alpha * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (alpha * x + beta)).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 {
        if ss_res.abs() < 1e-12 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(RegressionFit {
        alpha,
        beta,
        r_squared,
    })
}

/// One pairwise mode comparison at the final step.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ModePairTest {
    pub mode_a: ModeId,
    pub mode_b: ModeId,
    pub t: f64,
    pub p: f64,
}

/// Paired t-tests (by member index) over every mode pair present.
pub fn mode_pair_tests(results: &[EnsembleResult]) -> Result<Vec<ModePairTest>> {
    let mut out = Vec::new();
    for (i, a) in results.iter().enumerate() {
        for b in &results[i + 1..] {
            if a.config.mode == b.config.mode {
                continue;
            }
            let test = paired_t_test(&a.member_final, &b.member_final)?;
            out.push(ModePairTest {
                mode_a: a.config.mode,
                mode_b: b.config.mode,
                t: test.t,
                p: test.p,
            });
        }
    }
    Ok(out)
}

/// Per-mode regression of the final `λ` against `ln(b)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockRegression {
    pub mode: ModeId,
    pub points: Vec<(usize, f64)>,
    pub fit: RegressionFit,
}

/// The results file: config echoes with aggregates, the pairwise test
/// matrix, and block-count regression fits when a sweep produced them.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub version: u32,
    pub results: Vec<EnsembleResult>,
    pub mode_pair_tests: Vec<ModePairTest>,
    pub block_regressions: Vec<BlockRegression>,
}

impl ResultsDocument {
    pub const VERSION: u32 = 1;

    pub fn new(results: Vec<EnsembleResult>) -> Result<Self> {
        let mode_pair_tests = mode_pair_tests(&results)?;
        Ok(Self {
            version: Self::VERSION,
            results,
            mode_pair_tests,
            block_regressions: Vec::new(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Statistics(format!("serializing results: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Statistics(format!("parsing results: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{toy_cipher, ToyKind};
    use approx::assert_abs_diff_eq;

    fn toy_config(mode: ModeId, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            cipher: toy_cipher(ToyKind::FixedPermutation, 8).unwrap(),
            mode,
            blocks: 2,
            ensemble_size: 8,
            steps: 12,
            rng_seed: seed,
            perturbation: PerturbationSpec::FixedLsb,
        }
    }

    #[test]
    fn dataset_is_deterministic_and_distinct() {
        let config = toy_config(ModeId::Cbc, 99);
        let a = generate_dataset(&config).unwrap();
        let b = generate_dataset(&config).unwrap();
        assert_eq!(a.len(), 8);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.key, y.key);
            assert_eq!(x.iv, y.iv);
            assert_eq!(x.plaintext, y.plaintext);
            assert_eq!(x.perturb_bit, y.perturb_bit);
        }
        let keys: std::collections::HashSet<u128> = a.iter().map(|m| m.key.value()).collect();
        assert_eq!(keys.len(), 8);
        assert!(a.iter().all(|m| m.plaintext.len() == 2));
    }

    #[test]
    fn key_exhaustion_is_a_generation_error() {
        // a 4-bit key space cannot hold 17 distinct keys
        let config = ExperimentConfig {
            cipher: toy_cipher(ToyKind::Xor, 4).unwrap(),
            mode: ModeId::Ecb,
            blocks: 1,
            ensemble_size: 17,
            steps: 4,
            rng_seed: 1,
            perturbation: PerturbationSpec::FixedLsb,
        };
        assert!(matches!(
            generate_dataset(&config),
            Err(Error::Generation(_))
        ));
    }

    #[test]
    fn aggregates_recompute_from_member_curves() {
        let result = run_ensemble(&toy_config(ModeId::Cbc, 5)).unwrap();
        let complete: Vec<&Vec<f64>> = result
            .member_curves
            .iter()
            .filter(|c| c.len() == result.config.steps)
            .collect();
        for (t, &mean) in result.mean_lambda.iter().enumerate() {
            let mut acc = 0.0;
            for curve in &complete {
                acc += curve[t];
            }
            assert_eq!(acc / complete.len() as f64, mean);
        }
        let finals: Vec<f64> = complete.iter().map(|c| *c.last().unwrap()).collect();
        assert_eq!(finals, result.member_final);
        let max = finals.iter().cloned().fold(f64::MIN, f64::max);
        let min = finals.iter().cloned().fold(f64::MAX, f64::min);
        assert_eq!(result.delta_final, max - min);
        assert!(result.delta_final >= 0.0 && result.sigma_final >= 0.0);
        let mean_final = result.mean_final();
        assert!(min <= mean_final && mean_final <= max);
    }

    #[test]
    fn degenerate_identical_members() {
        // aggregating the same trace several times gives σ = Δ = 0
        let config = toy_config(ModeId::Cfb, 6);
        let member = generate_dataset(&config).unwrap().remove(0);
        let ctx = ModeContext::new(config.mode, &config.cipher, &member.key).unwrap();
        let state = SystemState::new(member.plaintext.clone(), member.iv).unwrap();
        let trace = lyapunov_curve(&ctx, &state, member.perturb_bit, config.steps).unwrap();
        let result = summarize(&config, &vec![trace; 5]).unwrap();
        assert_eq!(result.sigma_final, 0.0);
        assert_eq!(result.delta_final, 0.0);
    }

    #[test]
    fn t_test_identical_samples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let test = paired_t_test(&a, &a).unwrap();
        assert_eq!(test.t, 0.0);
        assert_eq!(test.p, 1.0);
    }

    #[test]
    fn t_test_zero_variance_nonzero_mean() {
        // differences are all exactly 0.1: flagged p = 0
        let a = [1.0, 2.0, 3.0];
        let b = [1.1, 2.1, 3.1];
        let test = paired_t_test(&a, &b).unwrap();
        assert_eq!(test.p, 0.0);
        assert!(test.t.is_infinite() && test.t < 0.0);
    }

    #[test]
    fn t_test_textbook_case() {
        // frozen against scipy.stats.ttest_rel
        let a = [0.70, 0.30, 0.20, 0.60, 0.40, 0.40, 0.00, 0.70, 0.10, 0.30];
        let b = [0.50, 0.10, 0.00, 0.20, 0.40, 0.30, 0.00, 0.50, 0.30, 0.30];
        let test = paired_t_test(&a, &b).unwrap();
        assert_abs_diff_eq!(test.t, 2.091290026730777, epsilon = 1e-12);
        assert_abs_diff_eq!(test.p, 0.06604500568481554, epsilon = 1e-8);

        let a = [0.3, 0.9, 0.4, 0.75, 0.2];
        let b = [0.5, 0.6, 0.45, 0.8, 0.4];
        let test = paired_t_test(&a, &b).unwrap();
        assert_abs_diff_eq!(test.t, -0.43774052413166625, epsilon = 1e-12);
        assert_abs_diff_eq!(test.p, 0.6841735724143465, epsilon = 1e-8);
    }

    #[test]
    fn t_test_is_antisymmetric() {
        let a = [0.3, 0.9, 0.4, 0.75, 0.2];
        let b = [0.5, 0.6, 0.45, 0.8, 0.4];
        let ab = paired_t_test(&a, &b).unwrap();
        let ba = paired_t_test(&b, &a).unwrap();
        assert_abs_diff_eq!(ab.t, -ba.t, epsilon = 1e-15);
        assert_abs_diff_eq!(ab.p, ba.p, epsilon = 1e-15);
    }

    #[test]
    fn envelope_is_reflexive_and_separating() {
        let result = run_ensemble(&toy_config(ModeId::Cbc, 7)).unwrap();
        let curves = result.normalized_member_curves();
        assert_eq!(envelope_containment(&curves, &curves).unwrap(), 1.0);

        let flat_low: Vec<Vec<f64>> = (0..4).map(|_| vec![0.1; 12]).collect();
        let flat_high: Vec<Vec<f64>> = (0..4).map(|_| vec![0.9; 12]).collect();
        assert_eq!(envelope_containment(&flat_low, &flat_high).unwrap(), 0.0);
    }

    #[test]
    fn regression_recovers_exact_log_law() {
        // points exactly on λ = ln(b·n) = ln(b) + ln(n)
        let n = 64.0f64;
        let points: Vec<(usize, f64)> = [2usize, 4, 8, 16]
            .iter()
            .map(|&b| (b, (b as f64 * n).ln()))
            .collect();
        let fit = fit_lambda_vs_blocks(&points).unwrap();
        assert_abs_diff_eq!(fit.alpha, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.beta, n.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn regression_rejects_degenerate_input() {
        assert!(fit_lambda_vs_blocks(&[(2, 1.0), (2, 1.1), (4, 2.0)]).is_err());
        assert!(fit_lambda_vs_blocks(&[]).is_err());
    }

    #[test]
    fn results_document_roundtrip() {
        let results = vec![
            run_ensemble(&toy_config(ModeId::Ecb, 3)).unwrap(),
            run_ensemble(&toy_config(ModeId::Cbc, 3)).unwrap(),
        ];
        let doc = ResultsDocument::new(results).unwrap();
        assert_eq!(doc.mode_pair_tests.len(), 1);
        let json = doc.to_json().unwrap();
        let back = ResultsDocument::from_json(&json).unwrap();
        assert_eq!(back.to_json().unwrap(), json);
    }

    #[test]
    fn run_is_deterministic() {
        let a = run_ensemble(&toy_config(ModeId::Pcbc, 11)).unwrap();
        let b = run_ensemble(&toy_config(ModeId::Pcbc, 11)).unwrap();
        assert_eq!(a.member_curves, b.member_curves);
        assert_eq!(a.mean_lambda, b.mean_lambda);
    }

    #[test]
    fn config_validation() {
        let mut config = toy_config(ModeId::Ecb, 1);
        config.blocks = 0;
        assert!(config.validate().is_err());
        let mut config = toy_config(ModeId::Ecb, 1);
        config.ensemble_size = 1;
        assert!(config.validate().is_err());
        let mut config = toy_config(ModeId::Ecb, 1);
        config.perturbation = PerturbationSpec::FixedBit { bit: 9 };
        assert!(config.validate().is_err());
    }
}
