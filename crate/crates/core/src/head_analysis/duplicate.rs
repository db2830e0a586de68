use std::collections::BTreeMap;

use serde::Serialize;

use super::{Experiment, HeadId, Observations};
use crate::error::{Error, Result};
use crate::stats;

pub const NAME: &str = "name";
pub const NONNAME: &str = "nonname";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DuplicateRank {
    pub rank: usize,
    pub head: HeadId,
    pub score: f64,
}

/// Heads ranked by mean attention from a repeated name to its first
/// occurrence. Ties go to the lower `(layer, head)`.
pub fn duplicate_token_ranking(obs: &Observations) -> Result<Vec<DuplicateRank>> {
    let scores = obs.values(Experiment::Duplicate, NAME);
    if scores.is_empty() {
        return Err(Error::MissingData(format!("no duplicate records with condition `{NAME}`")));
    }
    let mut rows: Vec<(HeadId, f64)> = scores.iter().map(|(h, v)| (*h, stats::mean(v))).collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(rows.into_iter().enumerate().map(|(i, (head, score))| DuplicateRank { rank: i + 1, head, score }).collect())
}

/// Heads among the top `top` of `ranking` that are not in `bloom`.
pub fn duplicate_only_heads(ranking: &[DuplicateRank], bloom: &[HeadId], top: usize) -> Vec<HeadId> {
    ranking.iter().take(top).map(|r| r.head).filter(|h| !bloom.contains(h)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeadGeneralization {
    pub head: HeadId,
    pub name_mean: f64,
    pub nonname_mean: f64,
    /// `nonname_mean / name_mean` clipped to `[0, 1]`; `None` when the name
    /// mean is zero.
    pub index: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralizationReport {
    pub heads: Vec<HeadGeneralization>,
    pub bloom: Vec<HeadId>,
    pub comparison: Vec<HeadId>,
    pub bloom_index: f64,
    pub comparison_index: f64,
    /// `bloom_index / comparison_index - 1`.
    pub relative_gain: f64,
    pub bloom_nonname: f64,
    pub comparison_nonname: f64,
    pub nonname_ratio: f64,
    pub warnings: Vec<String>,
}

fn group_mean(
    values: &BTreeMap<HeadId, HeadGeneralization>,
    heads: &[HeadId],
    f: impl Fn(&HeadGeneralization) -> Option<f64>,
) -> f64 {
    let xs: Vec<f64> = heads.iter().filter_map(|h| values.get(h).and_then(&f)).collect();
    if xs.is_empty() {
        f64::NAN
    } else {
        stats::mean(&xs)
    }
}

/// Per-head generalization index and the bloom-vs-comparison group contrast.
pub fn generalization_index(
    obs: &Observations,
    bloom: &[HeadId],
    comparison: &[HeadId],
) -> Result<GeneralizationReport> {
    let names = obs.values(Experiment::Duplicate, NAME);
    let nonnames = obs.values(Experiment::Duplicate, NONNAME);
    if names.is_empty() || nonnames.is_empty() {
        return Err(Error::MissingData(format!("duplicate records need `{NAME}` and `{NONNAME}` conditions")));
    }
    let mut warnings = Vec::new();
    let mut per_head = BTreeMap::new();
    for (h, name) in &names {
        let Some(non) = nonnames.get(h) else {
            warnings.push(format!("{h} has no `{NONNAME}` records"));
            continue;
        };
        let name_mean = stats::mean(name);
        let nonname_mean = stats::mean(non);
        if name_mean == 0.0 {
            warnings.push(format!("{h} has zero name-repeat attention; index undefined"));
        }
        let index = (name_mean > 0.0).then(|| (nonname_mean / name_mean).clamp(0.0, 1.0));
        per_head.insert(*h, HeadGeneralization { head: *h, name_mean, nonname_mean, index });
    }
    for h in bloom.iter().chain(comparison) {
        if !per_head.contains_key(h) {
            return Err(Error::MissingData(format!("no duplicate records for {h}")));
        }
    }
    let bloom_index = group_mean(&per_head, bloom, |g| g.index);
    let comparison_index = group_mean(&per_head, comparison, |g| g.index);
    let bloom_nonname = group_mean(&per_head, bloom, |g| Some(g.nonname_mean));
    let comparison_nonname = group_mean(&per_head, comparison, |g| Some(g.nonname_mean));
    Ok(GeneralizationReport {
        heads: per_head.into_values().collect(),
        bloom: bloom.to_vec(),
        comparison: comparison.to_vec(),
        bloom_index,
        comparison_index,
        relative_gain: bloom_index / comparison_index - 1.0,
        bloom_nonname,
        comparison_nonname,
        nonname_ratio: bloom_nonname / comparison_nonname,
        warnings,
    })
}
