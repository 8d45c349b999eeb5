//! Hardness ratio, IQM aggregation, correlation, and diversity accounting.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::FusionSchedule;
use crate::transforms::{Diversity, TransformKind, TransformSpec};

/// Where a set of episode returns came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReturnContext {
    pub policy_id: String,
    pub env_id: String,
    pub transform: Option<String>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSample {
    pub episode_returns: Vec<f64>,
    pub context: ReturnContext,
}

impl ReturnSample {
    pub fn new(episode_returns: Vec<f64>, context: ReturnContext) -> Result<Self> {
        if episode_returns.is_empty() {
            return Err(Error::InvalidValue("return sample is empty".into()));
        }
        if let Some(bad) = episode_returns.iter().find(|r| !r.is_finite()) {
            return Err(Error::InvalidValue(format!("non-finite episode return {bad}")));
        }
        Ok(Self {
            episode_returns,
            context,
        })
    }

    pub fn from_returns(episode_returns: Vec<f64>) -> Result<Self> {
        Self::new(episode_returns, ReturnContext::default())
    }

    pub fn len(&self) -> usize {
        self.episode_returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episode_returns.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.episode_returns)
    }

    pub fn iqm(&self) -> f64 {
        iqm(&self.episode_returns).expect("sample is non-empty")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardnessReport {
    pub clean: ReturnSample,
    pub augmented: ReturnSample,
    pub clean_mean: f64,
    pub aug_mean: f64,
    pub ratio: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Mean clean return over mean augmented return.
pub fn hardness(clean: &ReturnSample, augmented: &ReturnSample) -> Result<HardnessReport> {
    if clean.is_empty() || augmented.is_empty() {
        return Err(Error::InvalidValue("hardness needs non-empty samples".into()));
    }
    let clean_mean = clean.mean();
    let aug_mean = augmented.mean();
    if aug_mean == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    Ok(HardnessReport {
        clean: clean.clone(),
        augmented: augmented.clone(),
        clean_mean,
        aug_mean,
        ratio: clean_mean / aug_mean,
    })
}

/// Percentile of sorted data, linear interpolation between closest ranks
/// (rank `p · (n - 1)`).
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let rank = p * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64)
}

/// Mean of the values lying between the 25th and 75th percentiles, inclusive.
pub fn iqm(scores: &[f64]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::InvalidValue("iqm of an empty list".into()));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = percentile_sorted(&sorted, 0.25);
    let hi = percentile_sorted(&sorted, 0.75);
    let middle: Vec<f64> = sorted.iter().copied().filter(|&v| v >= lo && v <= hi).collect();
    if middle.is_empty() {
        // Only reachable through rounding in the interpolated bounds.
        return Ok(percentile_sorted(&sorted, 0.5));
    }
    Ok(mean(&middle))
}

pub fn median(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    percentile_sorted(&sorted, 0.5)
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DegenerateVariance);
    }
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub strength: u32,
    pub clean_mean: f64,
    pub aug_mean: f64,
    pub n_episodes: usize,
    /// `None` when the augmented mean is zero.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrengthHardnessCurve {
    pub op: TransformKind,
    pub points: Vec<CurvePoint>,
    /// `None` when the correlation is undefined.
    pub pearson_r: Option<f64>,
}

impl StrengthHardnessCurve {
    pub fn pearson(&self) -> Result<f64> {
        self.pearson_r.ok_or(Error::DegenerateVariance)
    }

    fn finite_pairs(&self) -> (Vec<f64>, Vec<f64>) {
        self.points
            .iter()
            .filter_map(|p| p.ratio.map(|r| (f64::from(p.strength), r)))
            .unzip()
    }
}

/// Pearson correlation of `(strength, ratio)` pooled over several curves.
pub fn pooled_pearson(curves: &[StrengthHardnessCurve]) -> Result<f64> {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for c in curves {
        let (x, y) = c.finite_pairs();
        xs.extend(x);
        ys.extend(y);
    }
    pearson(&xs, &ys)
}

/// Hardness of `op` at each strength against one shared clean baseline.
///
/// `evaluator(None)` must return the clean sample and `evaluator(Some(spec))`
/// the sample under augmentation `spec`.
pub fn strength_hardness_curve<E>(mut evaluator: E, op: TransformKind, strengths: &[u32]) -> Result<StrengthHardnessCurve>
where
    E: FnMut(Option<&TransformSpec>) -> Result<ReturnSample>,
{
    if strengths.is_empty() {
        return Err(Error::InvalidValue("no strengths to evaluate".into()));
    }
    let clean = evaluator(None)?;
    let mut points = Vec::with_capacity(strengths.len());
    for &s in strengths {
        let spec = TransformSpec::new(op, s, s);
        let augmented = evaluator(Some(&spec))?;
        let ratio = match hardness(&clean, &augmented) {
            Ok(r) => Some(r.ratio),
            Err(Error::DegenerateDenominator) => None,
            Err(e) => return Err(e),
        };
        points.push(CurvePoint {
            strength: s,
            clean_mean: clean.mean(),
            aug_mean: augmented.mean(),
            n_episodes: augmented.len(),
            ratio,
        });
    }
    let mut curve = StrengthHardnessCurve {
        op,
        points,
        pearson_r: None,
    };
    if curve.points.len() >= 3 {
        let (xs, ys) = curve.finite_pairs();
        curve.pearson_r = pearson(&xs, &ys).ok();
    }
    Ok(curve)
}

pub const CURVE_CSV_HEADER: &str = "strength,hardness_ratio,clean_mean,aug_mean,n_episodes,seed";

/// Writes one block of rows per `(seed, curve)` and a trailing
/// `# pearson_r=<value>` comment (`nan` when undefined).
pub fn write_curve_csv<W: Write>(mut out: W, blocks: &[(u64, StrengthHardnessCurve)], pearson_r: Option<f64>) -> std::io::Result<()> {
    writeln!(out, "{CURVE_CSV_HEADER}")?;
    for (seed, curve) in blocks {
        for p in &curve.points {
            let ratio = p.ratio.map_or_else(|| "inf".to_string(), |r| r.to_string());
            writeln!(
                out,
                "{},{},{},{},{},{}",
                p.strength, ratio, p.clean_mean, p.aug_mean, p.n_episodes, seed
            )?;
        }
    }
    match pearson_r {
        Some(r) => writeln!(out, "# pearson_r={r}"),
        None => writeln!(out, "# pearson_r=nan"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub strength_diversity: u32,
    pub spatial_diversity: Diversity,
    pub type_diversity: usize,
}

pub fn diversity_report(spec: &TransformSpec) -> DiversityReport {
    DiversityReport {
        strength_diversity: spec.strength_max - spec.strength_min + 1,
        spatial_diversity: spec.diversity,
        type_diversity: 1,
    }
}

/// Schedules: strength diversity counts distinct `(op, strength)` pairs,
/// spatial diversity sums finite `D`s (unlimited if any op is unlimited).
pub fn schedule_diversity(schedule: &FusionSchedule) -> DiversityReport {
    let mut pairs = std::collections::HashSet::new();
    let mut spatial = Diversity::Finite(0);
    for op in &schedule.ops {
        for s in op.strength_min..=op.strength_max {
            pairs.insert((op.op, s));
        }
        spatial = match (spatial, op.diversity) {
            (Diversity::Finite(a), Diversity::Finite(b)) => Diversity::Finite(a + b),
            _ => Diversity::Unlimited,
        };
    }
    DiversityReport {
        strength_diversity: pairs.len() as u32,
        spatial_diversity: spatial,
        type_diversity: schedule.type_diversity(),
    }
}
