use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{Experiment, HeadId, Observations};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::stats::{
    self, binomial_tail, bonferroni_threshold, bootstrap_ci, bootstrap_ratio_ci, cohens_d, mann_whitney_u,
    permutation_group_test, Alternative, ConfidenceInterval, EffectSize, TestResult,
};

/// Hit attention below this counts as a miss. Fixed so the classification
/// rule stays canonical.
pub const MISS_THRESHOLD: f64 = 0.01;
/// Null miss rate for the one-sided binomial test.
pub const MISS_NULL_RATE: f64 = 0.05;
pub const SELECTIVITY_FLOOR: f64 = 3.0;
pub const MISS_RATE_CEILING: f64 = 0.1;
pub const HIT_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignatureOptions {
    pub level: f64,
    pub resamples: usize,
    pub seed: u64,
}

impl Default for SignatureOptions {
    fn default() -> Self {
        Self { level: 0.95, resamples: 10_000, seed: 42 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeadMetrics {
    pub head: HeadId,
    pub n_hit: usize,
    pub n_baseline: usize,
    pub n_synonym: usize,
    pub hit_mean: f64,
    pub baseline_mean: f64,
    pub synonym_mean: Option<f64>,
    pub hit_ci: ConfidenceInterval,
    /// `hit_mean / baseline_mean`; infinite when the baseline mean is zero.
    pub selectivity: f64,
    pub selectivity_infinite: bool,
    /// Absent when the baseline mean is zero.
    pub selectivity_ci: Option<ConfidenceInterval>,
    pub misses: usize,
    pub miss_rate: f64,
    /// `synonym_mean / hit_mean`.
    pub fp_ratio: Option<f64>,
    /// One-sided hit > baseline.
    pub hit_vs_baseline: TestResult,
    /// One-sided miss rate < [`MISS_NULL_RATE`].
    pub miss_test: TestResult,
}

fn head_metrics(
    head: HeadId,
    hit: &[f64],
    baseline: &[f64],
    synonym: Option<&Vec<f64>>,
    opts: &SignatureOptions,
    seed: u64,
) -> Result<HeadMetrics> {
    let hit_mean = stats::mean(hit);
    let baseline_mean = stats::mean(baseline);
    let synonym_mean = synonym.filter(|s| !s.is_empty()).map(|s| stats::mean(s));
    let infinite = baseline_mean == 0.0;
    let selectivity = if infinite { f64::INFINITY } else { hit_mean / baseline_mean };
    let selectivity_ci = if infinite {
        None
    } else {
        Some(bootstrap_ratio_ci(hit, baseline, opts.level, opts.resamples, derive_seed(seed, 1))?)
    };
    let misses = hit.iter().filter(|&&v| v < MISS_THRESHOLD).count();
    Ok(HeadMetrics {
        head,
        n_hit: hit.len(),
        n_baseline: baseline.len(),
        n_synonym: synonym.map_or(0, Vec::len),
        hit_mean,
        baseline_mean,
        synonym_mean,
        hit_ci: bootstrap_ci(hit, opts.level, opts.resamples, derive_seed(seed, 0))?,
        selectivity,
        selectivity_infinite: infinite,
        selectivity_ci,
        misses,
        miss_rate: misses as f64 / hit.len() as f64,
        fp_ratio: synonym_mean.filter(|_| hit_mean > 0.0).map(|s| s / hit_mean),
        hit_vs_baseline: mann_whitney_u(hit, baseline, Alternative::Greater),
        miss_test: binomial_tail(misses as u64, hit.len() as u64, MISS_NULL_RATE, Alternative::Less)?,
    })
}

/// Per-head metrics from `signature` records with conditions `hit`,
/// `baseline` and optionally `synonym`. Heads are processed in parallel,
/// each with its own seed derived from the head coordinate.
pub fn signature_metrics(obs: &Observations, opts: &SignatureOptions) -> Result<Vec<HeadMetrics>> {
    let hits = obs.values(Experiment::Signature, "hit");
    let baselines = obs.values(Experiment::Signature, "baseline");
    let synonyms = obs.values(Experiment::Signature, "synonym");
    let heads = obs.heads(Experiment::Signature);
    if heads.is_empty() {
        return Err(Error::MissingData("no signature records".into()));
    }
    for h in &heads {
        if !hits.contains_key(h) || !baselines.contains_key(h) {
            return Err(Error::MissingData(format!("{h} lacks hit or baseline records")));
        }
    }
    heads
        .into_par_iter()
        .map(|h| {
            let seed = derive_seed(opts.seed, (u64::from(h.layer) << 32) | u64::from(h.head));
            head_metrics(h, &hits[&h], &baselines[&h], synonyms.get(&h), opts, seed)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub head: HeadId,
    /// 1-based selectivity rank, ties broken by head coordinate.
    pub rank: usize,
    pub selectivity: f64,
    pub miss_rate: f64,
    pub hit_mean: f64,
    pub strong_bloom: bool,
    /// Which of the three criteria failed.
    pub failed: Vec<&'static str>,
}

/// Apply the three-way rule (selectivity > 3, miss rate < 10%, hit mean >
/// 0.05) and rank heads by selectivity, descending.
pub fn classify_heads(metrics: &[HeadMetrics]) -> Vec<Classification> {
    let mut rows: Vec<Classification> = metrics
        .iter()
        .map(|m| {
            let mut failed = Vec::new();
            if !(m.selectivity > SELECTIVITY_FLOOR) {
                failed.push("selectivity");
            }
            if !(m.miss_rate < MISS_RATE_CEILING) {
                failed.push("miss-rate");
            }
            if !(m.hit_mean > HIT_FLOOR) {
                failed.push("hit");
            }
            Classification {
                head: m.head,
                rank: 0,
                selectivity: m.selectivity,
                miss_rate: m.miss_rate,
                hit_mean: m.hit_mean,
                strong_bloom: failed.is_empty(),
                failed,
            }
        })
        .collect();
    rows.sort_by(|a, b| b.selectivity.total_cmp(&a.selectivity).then(a.head.cmp(&b.head)));
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    rows
}

/// Group-level evidence that a candidate set stands apart from the rest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupTests {
    pub group: Vec<HeadId>,
    pub group_mean_selectivity: f64,
    pub population_mean_selectivity: f64,
    /// Random same-size groups whose mean selectivity reaches the observed.
    pub permutation: TestResult,
    /// Hit attention, candidates vs every other head.
    pub hit_effect: EffectSize,
    /// Bonferroni per-head threshold at alpha 0.05.
    pub alpha_per_head: f64,
    /// Candidates whose hit > baseline test clears `alpha_per_head`.
    pub significant: Vec<HeadId>,
}

pub fn group_tests(metrics: &[HeadMetrics], group: &[HeadId], resamples: usize, seed: u64) -> Result<GroupTests> {
    let mut sorted: Vec<&HeadMetrics> = metrics.iter().collect();
    sorted.sort_by_key(|m| m.head);
    let index: BTreeMap<HeadId, usize> = sorted.iter().enumerate().map(|(i, m)| (m.head, i)).collect();
    let idx = group
        .iter()
        .map(|h| index.get(h).copied().ok_or_else(|| Error::MissingData(format!("no metrics for {h}"))))
        .collect::<Result<Vec<_>>>()?;
    if let Some(m) = sorted.iter().find(|m| m.selectivity_infinite) {
        return Err(Error::InvalidParameter(format!(
            "{} has infinite selectivity; the permutation test needs finite values",
            m.head
        )));
    }
    let selectivity: Vec<f64> = sorted.iter().map(|m| m.selectivity).collect();
    let in_group = |i: usize| idx.contains(&i);
    let hit_in: Vec<f64> = idx.iter().map(|&i| sorted[i].hit_mean).collect();
    let hit_out: Vec<f64> = (0..sorted.len()).filter(|&i| !in_group(i)).map(|i| sorted[i].hit_mean).collect();
    let alpha = bonferroni_threshold(0.05, sorted.len())?;
    Ok(GroupTests {
        group: group.to_vec(),
        group_mean_selectivity: idx.iter().map(|&i| selectivity[i]).sum::<f64>() / idx.len().max(1) as f64,
        population_mean_selectivity: stats::mean(&selectivity),
        permutation: permutation_group_test(&selectivity, &idx, resamples, seed)?,
        hit_effect: cohens_d(&hit_in, &hit_out)?,
        alpha_per_head: alpha,
        significant: idx
            .iter()
            .filter(|&&i| sorted[i].hit_vs_baseline.p_value < alpha)
            .map(|&i| sorted[i].head)
            .collect(),
    })
}
