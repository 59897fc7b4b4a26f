//! Per-mode reference profiles and nearest-profile classification.
//!
//! A profile is a normalized mean curve `λ(t)/λ_m` with a pointwise band over
//! the training members. An unknown trace is matched by root-mean-square
//! distance over the post-transient window; OFB and CTR are kept as separate
//! profiles but reported as a pair whenever they are jointly closest, since
//! their curves overlap.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleResult;
use crate::error::{Error, Result};
use crate::lyapunov::LyapunovTrace;
use crate::mode::ModeId;

/// Block-size family of a cipher.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "64-bit")]
    B64,
    #[serde(rename = "128-bit")]
    B128,
}

impl Family {
    pub fn from_block_bits(n: u32) -> Option<Family> {
        match n {
            64 => Some(Family::B64),
            128 => Some(Family::B128),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::B64 => "64-bit",
            Family::B128 => "128-bit",
        })
    }
}

/// The pair of modes whose curves are statistically indistinguishable.
pub const INDISTINGUISHABLE_PAIR: [ModeId; 2] = [ModeId::Ofb, ModeId::Ctr];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModeProfile {
    pub mode: ModeId,
    pub family: Family,
    /// Mean normalized curve over all training members.
    pub mean_curve: Vec<f64>,
    /// Pointwise minimum over training members.
    pub band_lo: Vec<f64>,
    /// Pointwise maximum over training members.
    pub band_hi: Vec<f64>,
    pub source_ciphers: Vec<String>,
}

impl ModeProfile {
    pub fn is_pair_tagged(&self) -> bool {
        INDISTINGUISHABLE_PAIR.contains(&self.mode)
    }
}

/// Versioned store of trained profiles, all sharing one horizon.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileSet {
    pub version: u32,
    pub steps: usize,
    pub profiles: Vec<ModeProfile>,
}

impl ProfileSet {
    pub const VERSION: u32 = 1;

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Statistics(format!("serializing profiles: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Statistics(format!("parsing profiles: {e}")))
    }

    pub fn families(&self) -> Vec<Family> {
        let mut fams: Vec<Family> = self.profiles.iter().map(|p| p.family).collect();
        fams.sort();
        fams.dedup();
        fams
    }

    fn find(&self, mode: ModeId, family: Family) -> Option<&ModeProfile> {
        self.profiles
            .iter()
            .find(|p| p.mode == mode && p.family == family)
    }
}

/// Build profiles from trained ensembles, grouped by (mode, family) and
/// merged across ciphers. Every supported family must cover all six modes.
pub fn build_profiles(results: &[EnsembleResult]) -> Result<ProfileSet> {
    if results.is_empty() {
        return Err(Error::InvalidParameter(
            "no ensemble results to train on".into(),
        ));
    }
    let steps = results[0].config.steps;
    if results.iter().any(|r| r.config.steps != steps) {
        return Err(Error::Dimension(
            "training results must share one horizon".into(),
        ));
    }
    let mut groups: BTreeMap<(Family, ModeId), Vec<&EnsembleResult>> = BTreeMap::new();
    for result in results {
        let n = result.config.cipher.block_bits;
        let family = Family::from_block_bits(n).ok_or_else(|| {
            Error::InvalidParameter(format!("no block-size family for n={n} bits"))
        })?;
        groups
            .entry((family, result.config.mode))
            .or_default()
            .push(result);
    }
    // coverage: each family present must provide every mode
    let families: Vec<Family> = {
        let mut f: Vec<Family> = groups.keys().map(|(fam, _)| *fam).collect();
        f.sort();
        f.dedup();
        f
    };
    let mut gaps = Vec::new();
    for &family in &families {
        for mode in ModeId::ALL {
            if !groups.contains_key(&(family, mode)) {
                gaps.push(format!("{family}/{mode}"));
            }
        }
    }
    if !gaps.is_empty() {
        return Err(Error::ProfileGap(gaps.join(", ")));
    }

    let mut profiles = Vec::with_capacity(groups.len());
    for ((family, mode), group) in groups {
        let mut curves: Vec<Vec<f64>> = Vec::new();
        let mut sources: Vec<String> = Vec::new();
        for result in group {
            curves.extend(result.normalized_member_curves());
            let id = result.config.cipher.id.to_string();
            if !sources.contains(&id) {
                sources.push(id);
            }
        }
        if curves.is_empty() {
            return Err(Error::Statistics(format!(
                "{family}/{mode}: no complete member curves"
            )));
        }
        let members = curves.len() as f64;
        let mut mean = vec![0.0; steps];
        let mut lo = vec![f64::MAX; steps];
        let mut hi = vec![f64::MIN; steps];
        for curve in &curves {
            for (t, &v) in curve.iter().enumerate() {
                mean[t] += v;
                lo[t] = lo[t].min(v);
                hi[t] = hi[t].max(v);
            }
        }
        for v in &mut mean {
            *v /= members;
        }
        sources.sort();
        profiles.push(ModeProfile {
            mode,
            family,
            mean_curve: mean,
            band_lo: lo,
            band_hi: hi,
            source_ciphers: sources,
        });
    }
    Ok(ProfileSet {
        version: ProfileSet::VERSION,
        steps,
        profiles,
    })
}

/// Classification outcome: the nearest mode (expanded to the OFB/CTR pair
/// when those two jointly beat everything else) and its family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Verdict {
    pub predicted: Vec<ModeId>,
    pub family: Family,
    pub distance: f64,
    pub runner_up_margin: f64,
}

/// RMS distance between a normalized trace and a profile mean over the
/// post-transient window `t ∈ (L/4, L]`.
fn window_rms(trace: &[f64], profile: &[f64]) -> f64 {
    let steps = profile.len();
    let cut = steps / 4;
    let mut acc = 0.0;
    for t in cut..steps {
        let d = trace[t] - profile[t];
        acc += d * d;
    }
    (acc / (steps - cut) as f64).sqrt()
}

/// Classify a normalized curve (`λ(t)/λ_m`, `t = 1..`) against the store.
pub fn classify_normalized(curve: &[f64], profiles: &ProfileSet) -> Result<Verdict> {
    if profiles.profiles.is_empty() {
        return Err(Error::InvalidParameter("empty profile set".into()));
    }
    if curve.len() < profiles.steps {
        return Err(Error::Dimension(format!(
            "trace has {} steps, profiles need at least {}",
            curve.len(),
            profiles.steps
        )));
    }
    let curve = &curve[..profiles.steps];
    let mut distances: Vec<(f64, &ModeProfile)> = profiles
        .profiles
        .iter()
        .map(|p| (window_rms(curve, &p.mean_curve), p))
        .collect();
    distances.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (best_distance, best) = distances[0];

    let mut predicted = vec![best.mode];
    if best.is_pair_tagged() {
        let partner_mode = if best.mode == ModeId::Ofb {
            ModeId::Ctr
        } else {
            ModeId::Ofb
        };
        if let Some(partner) = profiles.find(partner_mode, best.family) {
            let partner_distance = window_rms(curve, &partner.mean_curve);
            let closest_other = distances
                .iter()
                .filter(|(_, p)| {
                    !(p.family == best.family && INDISTINGUISHABLE_PAIR.contains(&p.mode))
                })
                .map(|(d, _)| *d)
                .fold(f64::INFINITY, f64::min);
            if partner_distance < closest_other {
                predicted = vec![ModeId::Ofb, ModeId::Ctr];
            }
        }
    }

    let runner_up = distances
        .iter()
        .filter(|(_, p)| !(p.family == best.family && predicted.contains(&p.mode)))
        .map(|(d, _)| *d)
        .fold(f64::INFINITY, f64::min);
    let verdict = Verdict {
        predicted,
        family: best.family,
        distance: best_distance,
        runner_up_margin: runner_up - best_distance,
    };
    assert!(
        distances.iter().all(|(d, _)| best_distance <= *d),
        "verdict ordering violated"
    );
    Ok(verdict)
}

/// Classify a raw trace by normalizing it with its own `λ_m`.
pub fn classify_trace(trace: &LyapunovTrace, profiles: &ProfileSet) -> Result<Verdict> {
    classify_normalized(&trace.normalized(), profiles)
}

/// Mode label with OFB and CTR collapsed into one class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModeClass {
    Ecb,
    Cbc,
    Cfb,
    Pcbc,
    OfbCtr,
}

impl ModeClass {
    pub fn from_mode(mode: ModeId) -> Self {
        match mode {
            ModeId::Ecb => ModeClass::Ecb,
            ModeId::Cbc => ModeClass::Cbc,
            ModeId::Cfb => ModeClass::Cfb,
            ModeId::Pcbc => ModeClass::Pcbc,
            ModeId::Ofb | ModeId::Ctr => ModeClass::OfbCtr,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModeClass::Ecb => "ecb",
            ModeClass::Cbc => "cbc",
            ModeClass::Cfb => "cfb",
            ModeClass::Pcbc => "pcbc",
            ModeClass::OfbCtr => "ofb+ctr",
        }
    }
}

/// Counts of true label (row) versus predicted label (column).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<(Family, ModeClass)>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn diagonal_total(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal_total() == self.total()
    }

    /// CSV rendering: header of predicted labels, one row per true label.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "true\\predicted")?;
        for (family, class) in &self.labels {
            write!(w, ",{family}:{}", class.as_str())?;
        }
        writeln!(w)?;
        for (i, (family, class)) in self.labels.iter().enumerate() {
            write!(w, "{family}:{}", class.as_str())?;
            for count in &self.counts[i] {
                write!(w, ",{count}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Classify labeled traces and tabulate the outcomes.
pub fn confusion_matrix(
    labeled: &[(ModeId, Family, Vec<f64>)],
    profiles: &ProfileSet,
) -> Result<ConfusionMatrix> {
    let mut label_set: Vec<(Family, ModeClass)> = profiles
        .profiles
        .iter()
        .map(|p| (p.family, ModeClass::from_mode(p.mode)))
        .chain(
            labeled
                .iter()
                .map(|(m, f, _)| (*f, ModeClass::from_mode(*m))),
        )
        .collect();
    label_set.sort();
    label_set.dedup();
    let index: BTreeMap<(Family, ModeClass), usize> =
        label_set.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let mut counts = vec![vec![0u64; label_set.len()]; label_set.len()];
    for (mode, family, curve) in labeled {
        let verdict = classify_normalized(curve, profiles)?;
        let row = index[&(*family, ModeClass::from_mode(*mode))];
        let col = index[&(verdict.family, ModeClass::from_mode(verdict.predicted[0]))];
        counts[row][col] += 1;
    }
    Ok(ConfusionMatrix {
        labels: label_set,
        counts,
    })
}
