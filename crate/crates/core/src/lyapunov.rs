//! Defect propagation with exact multiplicity counting.
//!
//! A trajectory is compared against single-cell-flip replicas of itself, one
//! step at a time. The multiplicity `m_t(c)` counts, exactly, the number of
//! propagation pathways terminating in cell `c` after `t` steps; their sum
//! `ε_t` drives the divergence rate `λ(t) = ln(ε_t)/t` (the initial defect
//! count is 1). Multiplicities are arbitrary-precision naturals: `ε_200` on a
//! 320-cell system reaches ~e^1150, far beyond any fixed-width integer, and
//! exactness is what lets the engine be checked against brute-force pathway
//! enumeration with no tolerance at all.
//!
//! Replica chaining values: a replica is the reference text with one cell
//! complemented, evolved one step. For ECB, CBC and CFB the replicas share
//! the reference's chaining value γ; γ equals the last ciphertext block, so
//! flips of block `b` already probe it. For OFB, CTR and PCBC the γ-seeded
//! material (keystream, counters, first-block whitening) is injected from
//! outside the text cells, and a shared γ would cancel out of the comparison
//! entirely; the perturbed ensemble instead evolves under the divergent twin
//! value `γ* = E_K(γ)` from the second step onward. The first step always
//! shares γ, making `ε_1` the plain Hamming distance between the two
//! trajectories.

use std::io::Write;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitBlock;
use crate::error::{Error, Result};
use crate::mode::{ModeContext, ModeId, SystemState};

/// Convergence threshold on `|λ(t) − λ(t+1)|`.
pub const CONVERGENCE_EPSILON: f64 = 1.19e-4;

/// Where to flip the single perturbation bit. The flip always lands in the
/// first block.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum PerturbationSpec {
    /// Bit `n`, the least significant bit of block 1. The default.
    #[default]
    FixedLsb,
    /// A pinned 1-based bit index in `[1, n]`.
    FixedBit { bit: u32 },
    /// A fresh uniformly drawn position for every ensemble member.
    RandomPerMember,
}

impl PerturbationSpec {
    /// Resolve to a concrete 1-based bit index for one member.
    pub fn resolve<R: Rng + ?Sized>(&self, n: u32, rng: &mut R) -> u32 {
        match self {
            PerturbationSpec::FixedLsb => n,
            PerturbationSpec::FixedBit { bit } => *bit,
            PerturbationSpec::RandomPerMember => rng.random_range(1..=n),
        }
    }
}

/// Flip bit `bit` (1-based, MSB-first) of the first block.
pub fn initial_perturbation(plaintext: &SystemState, bit: u32) -> Result<SystemState> {
    let n = plaintext.block_bits();
    if !(1..=n).contains(&bit) {
        return Err(Error::InvalidParameter(format!(
            "perturbation bit {bit} out of [1, {n}]"
        )));
    }
    let mut out = plaintext.clone();
    out.blocks[0] = out.blocks[0].flip_bit(bit);
    Ok(out)
}

/// Exact per-cell pathway counts at one time step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectField {
    multiplicities: Vec<BigUint>,
    t: u64,
}

impl DefectField {
    /// The `t = 0` field: a single defect of multiplicity 1 in block 1.
    pub fn seed(cells: usize, n: u32, bit: u32) -> Result<Self> {
        if !(1..=n).contains(&bit) {
            return Err(Error::InvalidParameter(format!(
                "perturbation bit {bit} out of [1, {n}]"
            )));
        }
        let mut multiplicities = vec![BigUint::zero(); cells];
        multiplicities[(bit - 1) as usize] = BigUint::one();
        Ok(Self {
            multiplicities,
            t: 0,
        })
    }

    #[inline]
    pub fn t(&self) -> u64 {
        self.t
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.multiplicities.len()
    }

    pub fn multiplicity(&self, cell: usize) -> &BigUint {
        &self.multiplicities[cell]
    }

    /// `ε_t`, the total defect count.
    pub fn total(&self) -> BigUint {
        self.multiplicities.iter().sum()
    }

    pub fn active_cells(&self) -> Vec<usize> {
        self.multiplicities
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.is_zero())
            .map(|(c, _)| c)
            .collect()
    }

    /// Merge one propagation round: every pathway at `cell` continues into
    /// each of `targets`, so each target gains `m_t(cell)`.
    fn accumulate(next: &mut [BigUint], m: &BigUint, targets: &[usize]) {
        for &target in targets {
            next[target] += m;
        }
    }
}

/// The chaining value under which the perturbed replicas evolve.
fn replica_iv(ctx: &ModeContext, reference: &SystemState) -> BitBlock {
    match ctx.mode() {
        ModeId::Ecb | ModeId::Cbc | ModeId::Cfb => reference.iv,
        ModeId::Ofb | ModeId::Ctr | ModeId::Pcbc => {
            if reference.t == 0 {
                reference.iv
            } else {
                ctx.cipher().encrypt(reference.iv)
            }
        }
    }
}

/// Advance the reference one step and propagate every defect through it.
///
/// For each active cell `c`, the replica (reference with `c` complemented) is
/// evolved one step under the replica chaining value; every cell where it
/// differs from the evolved reference inherits `m_t(c)`. Costs at most
/// `N + 1` mode applications.
pub fn defect_step(
    ctx: &ModeContext,
    reference: &SystemState,
    field: &DefectField,
) -> Result<(SystemState, DefectField, BigUint)> {
    if field.cells() != reference.cells() {
        return Err(Error::Dimension(format!(
            "defect field has {} cells, state has {}",
            field.cells(),
            reference.cells()
        )));
    }
    if field.t != reference.t {
        return Err(Error::InvalidParameter(format!(
            "defect field at t={} but state at t={}",
            field.t, reference.t
        )));
    }
    let next_reference = ctx.encrypt_once(reference)?;
    let twin_iv = replica_iv(ctx, reference);
    let active = field.active_cells();

    let evolve = |&cell: &usize| -> Vec<usize> {
        let mut replica = reference.flip_cell(cell);
        replica.iv = twin_iv;
        let evolved = ctx
            .encrypt_once(&replica)
            .expect("replica dimensions match reference");
        evolved.diff_cells(&next_reference)
    };
    // Replica evolutions are independent; the merge below is an exact sum,
    // so the parallel collect order is immaterial.
    let diffs: Vec<Vec<usize>> = if active.len() >= 32 {
        active.par_iter().map(evolve).collect()
    } else {
        active.iter().map(evolve).collect()
    };

    let mut next = vec![BigUint::zero(); field.cells()];
    for (&cell, targets) in active.iter().zip(&diffs) {
        DefectField::accumulate(&mut next, &field.multiplicities[cell], targets);
    }
    let field = DefectField {
        multiplicities: next,
        t: field.t + 1,
    };
    let epsilon = field.total();
    Ok((next_reference, field, epsilon))
}

/// The full `ε_t`/`λ(t)` series of one trajectory.
#[derive(Clone, Debug)]
pub struct LyapunovTrace {
    /// Exact `ε_t` for `t = 1..` (until the horizon or defect death).
    pub epsilon: Vec<BigUint>,
    /// `ln ε_t`; `-inf` on the final entry of a dead trace.
    pub ln_epsilon: Vec<f64>,
    /// `λ(t) = ln(ε_t)/t`.
    pub lambda: Vec<f64>,
    /// Normalization constant `λ_m = ln(b·n)`.
    pub lambda_m: f64,
    /// Smallest `t` from which `|λ(t) − λ(t+1)|` stays below
    /// [`CONVERGENCE_EPSILON`] through the end of the trace.
    pub converged_at: Option<usize>,
    /// Step at which `ε_t` reached 0, if the defects died out (`λ = −∞`).
    pub died_at: Option<usize>,
}

impl LyapunovTrace {
    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn final_lambda(&self) -> f64 {
        *self.lambda.last().expect("trace has at least one step")
    }

    /// `λ(t)/λ_m` series.
    pub fn normalized(&self) -> Vec<f64> {
        self.lambda.iter().map(|l| l / self.lambda_m).collect()
    }
}

/// Natural log of an arbitrary-precision natural, without overflowing f64.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 53 {
        let v = u64::try_from(x).expect("value fits in 53 bits");
        return (v as f64).ln();
    }
    let shift = bits - 53;
    let mantissa = u64::try_from(&(x >> shift)).expect("53-bit mantissa");
    (mantissa as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Mean-field upper bound `λ_m = ln(b·n)`.
pub fn lambda_upper_bound(b: usize, n: u32) -> f64 {
    ((b as u64 * n as u64) as f64).ln()
}

/// Evolve `steps` defect-propagation rounds from the plaintext state with a
/// single initial flip at `bit` (1-based, block 1).
///
/// The trace terminates early, flagged `λ = −∞`, if the defects die out.
pub fn lyapunov_curve(
    ctx: &ModeContext,
    plaintext: &SystemState,
    bit: u32,
    steps: usize,
) -> Result<LyapunovTrace> {
    if steps == 0 {
        return Err(Error::InvalidParameter(
            "lyapunov_curve needs steps >= 1".into(),
        ));
    }
    let n = plaintext.block_bits();
    let mut field = DefectField::seed(plaintext.cells(), n, bit)?;
    let mut state = plaintext.clone();
    let mut trace = LyapunovTrace {
        epsilon: Vec::with_capacity(steps),
        ln_epsilon: Vec::with_capacity(steps),
        lambda: Vec::with_capacity(steps),
        lambda_m: lambda_upper_bound(plaintext.block_count(), n),
        converged_at: None,
        died_at: None,
    };
    for t in 1..=steps {
        let (next_state, next_field, epsilon) = defect_step(ctx, &state, &field)?;
        state = next_state;
        field = next_field;
        let ln_eps = ln_biguint(&epsilon);
        trace.ln_epsilon.push(ln_eps);
        trace.lambda.push(ln_eps / t as f64);
        let died = epsilon.is_zero();
        trace.epsilon.push(epsilon);
        if died {
            trace.died_at = Some(t);
            return Ok(trace);
        }
    }
    trace.converged_at = converged_at(&trace.lambda);
    Ok(trace)
}

fn converged_at(lambda: &[f64]) -> Option<usize> {
    if lambda.len() < 2 {
        return None;
    }
    let mut from = None;
    for t in (0..lambda.len() - 1).rev() {
        if (lambda[t] - lambda[t + 1]).abs() < CONVERGENCE_EPSILON {
            from = Some(t + 1); // 1-based step index
        } else {
            break;
        }
    }
    from
}

/// Literal pathway enumeration, the oracle the multiplicity engine is judged
/// against. Every pathway is stored and evolved individually, with no
/// compression, so the multiset size is `ε_t` itself; `max_pathways` guards
/// against the exponential blowup. Small systems only.
pub fn naive_defect_oracle(
    ctx: &ModeContext,
    plaintext: &SystemState,
    bit: u32,
    steps: usize,
    max_pathways: usize,
) -> Result<NaiveTrace> {
    if steps == 0 {
        return Err(Error::InvalidParameter("oracle needs steps >= 1".into()));
    }
    let n = plaintext.block_bits();
    if !(1..=n).contains(&bit) {
        return Err(Error::InvalidParameter(format!(
            "perturbation bit {bit} out of [1, {n}]"
        )));
    }
    let cells = plaintext.cells();
    let mut state = plaintext.clone();
    // One entry per pathway: the cell its replica complements.
    let mut pathways: Vec<usize> = vec![(bit - 1) as usize];
    let mut out = NaiveTrace {
        epsilon: Vec::with_capacity(steps),
        multiplicities: Vec::new(),
    };
    for _ in 1..=steps {
        let next_state = ctx.encrypt_once(&state)?;
        let twin_iv = replica_iv(ctx, &state);
        let mut next_pathways = Vec::new();
        for &cell in &pathways {
            let mut replica = state.flip_cell(cell);
            replica.iv = twin_iv;
            let evolved = ctx.encrypt_once(&replica)?;
            for target in evolved.diff_cells(&next_state) {
                next_pathways.push(target);
                if next_pathways.len() > max_pathways {
                    return Err(Error::ResourceGuard(max_pathways));
                }
            }
        }
        let mut counts = vec![0u64; cells];
        for &c in &next_pathways {
            counts[c] += 1;
        }
        out.epsilon.push(BigUint::from(next_pathways.len()));
        out.multiplicities.push(counts);
        state = next_state;
        pathways = next_pathways;
        if pathways.is_empty() {
            break;
        }
    }
    Ok(out)
}

/// What the literal enumeration produced: `ε_t` plus per-cell pathway counts.
#[derive(Clone, Debug)]
pub struct NaiveTrace {
    pub epsilon: Vec<BigUint>,
    pub multiplicities: Vec<Vec<u64>>,
}

/// Trace file: CSV with columns `t, ln_epsilon, lambda, lambda_normalized`.
pub fn write_trace_csv<W: Write>(mut w: W, trace: &LyapunovTrace) -> Result<()> {
    writeln!(w, "t,ln_epsilon,lambda,lambda_normalized")?;
    for (i, (ln_eps, lambda)) in trace.ln_epsilon.iter().zip(&trace.lambda).enumerate() {
        writeln!(
            w,
            "{},{},{},{}",
            i + 1,
            ln_eps,
            lambda,
            lambda / trace.lambda_m
        )?;
    }
    Ok(())
}

/// Sidecar dump of the exact defect counts as decimal strings.
pub fn write_epsilon_decimal<W: Write>(mut w: W, trace: &LyapunovTrace) -> Result<()> {
    writeln!(w, "t,epsilon")?;
    for (i, eps) in trace.epsilon.iter().enumerate() {
        writeln!(w, "{},{}", i + 1, eps)?;
    }
    Ok(())
}
