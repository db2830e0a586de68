use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{Experiment, HeadId, Observations};
use crate::error::{Error, Result};
use crate::stats;

/// Condition carrying attention to the token after the first occurrence.
pub const INDUCTION_CONDITION: &str = "induction";
/// Condition carrying attention to position `i - 1`.
pub const PREVIOUS_CONDITION: &str = "previous";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaxonomyOptions {
    pub induction_threshold: f64,
    pub previous_threshold: f64,
    /// Expected (induction, previous-token) counts; a mismatch beyond
    /// `tolerance` produces a calibration warning.
    pub expected_counts: Option<(usize, usize)>,
    pub tolerance: usize,
}

impl Default for TaxonomyOptions {
    fn default() -> Self {
        Self { induction_threshold: 0.3, previous_threshold: 0.4, expected_counts: Some((16, 11)), tolerance: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaxonomyScore {
    pub head: HeadId,
    pub induction: f64,
    pub previous: f64,
    pub trials: usize,
    pub is_induction: bool,
    pub is_previous: bool,
}

/// Mean induction and previous-token attention per head.
pub fn taxonomy_scores(obs: &Observations, opts: &TaxonomyOptions) -> Result<Vec<TaxonomyScore>> {
    let induction = obs.values(Experiment::Taxonomy, INDUCTION_CONDITION);
    let previous = obs.values(Experiment::Taxonomy, PREVIOUS_CONDITION);
    let heads: BTreeSet<HeadId> = obs.heads(Experiment::Taxonomy);
    if heads.is_empty() {
        return Err(Error::MissingData("no taxonomy records".into()));
    }
    heads
        .into_iter()
        .map(|h| {
            let (Some(ind), Some(prev)) = (induction.get(&h), previous.get(&h)) else {
                return Err(Error::MissingData(format!(
                    "{h} needs both `{INDUCTION_CONDITION}` and `{PREVIOUS_CONDITION}` records"
                )));
            };
            let induction = stats::mean(ind);
            let previous = stats::mean(prev);
            Ok(TaxonomyScore {
                head: h,
                induction,
                previous,
                trials: ind.len().max(prev.len()),
                is_induction: induction >= opts.induction_threshold,
                is_previous: previous >= opts.previous_threshold,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaxonomySummary {
    pub bloom: Vec<HeadId>,
    pub induction: Vec<HeadId>,
    pub previous: Vec<HeadId>,
    /// `(category a, category b, shared heads)` for each pair of categories.
    pub overlaps: Vec<(String, String, Vec<HeadId>)>,
    pub zero_overlap: bool,
    pub warnings: Vec<String>,
}

/// Category sets and pairwise overlaps against a given membership-head set.
pub fn taxonomy_summary(scores: &[TaxonomyScore], bloom: &[HeadId], opts: &TaxonomyOptions) -> TaxonomySummary {
    let sets: BTreeMap<&str, BTreeSet<HeadId>> = [
        ("bloom", bloom.iter().copied().collect()),
        ("induction", scores.iter().filter(|s| s.is_induction).map(|s| s.head).collect()),
        ("previous-token", scores.iter().filter(|s| s.is_previous).map(|s| s.head).collect()),
    ]
    .into_iter()
    .collect();
    let names = ["bloom", "induction", "previous-token"];
    let mut overlaps = Vec::new();
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            let shared: Vec<HeadId> = sets[a].intersection(&sets[b]).copied().collect();
            overlaps.push(((*a).to_string(), (*b).to_string(), shared));
        }
    }
    let induction: Vec<HeadId> = sets["induction"].iter().copied().collect();
    let previous: Vec<HeadId> = sets["previous-token"].iter().copied().collect();
    let mut warnings = Vec::new();
    if let Some((want_ind, want_prev)) = opts.expected_counts {
        for (label, got, want) in
            [("induction", induction.len(), want_ind), ("previous-token", previous.len(), want_prev)]
        {
            if got.abs_diff(want) > opts.tolerance {
                warnings.push(format!(
                    "calibration: {got} {label} heads at the current threshold, expected {want} +/- {}",
                    opts.tolerance
                ));
            }
        }
    }
    TaxonomySummary {
        bloom: sets["bloom"].iter().copied().collect(),
        zero_overlap: overlaps.iter().all(|o| o.2.is_empty()),
        induction,
        previous,
        overlaps,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::head_analysis::{parse_observations, AttentionObservation, Header};
    use approx::assert_abs_diff_eq;

    fn obs(rows: &[(HeadId, &str, f64)]) -> Observations {
        let mut text = serde_json::to_string(&Header::new("toy", 2, 2)).unwrap();
        for (i, (h, c, v)) in rows.iter().enumerate() {
            let r = AttentionObservation {
                model: "toy".into(),
                layer: h.layer,
                head: h.head,
                experiment: Experiment::Taxonomy,
                sentence_id: format!("t{i}"),
                condition: (*c).into(),
                value: *v,
                meta: None,
            };
            text.push('\n');
            text.push_str(&serde_json::to_string(&r).unwrap());
        }
        parse_observations(text.as_bytes()).unwrap()
    }

    #[test]
    fn perfect_copy_and_uniform() {
        let copy = HeadId::new(1, 0);
        let uniform = HeadId::new(0, 1);
        let mut rows = Vec::new();
        for _ in 0..50 {
            rows.push((copy, "induction", 1.0));
            rows.push((copy, "previous", 0.0));
            rows.push((uniform, "induction", 1.0 / 50.0));
            rows.push((uniform, "previous", 1.0 / 50.0));
        }
        let scores = taxonomy_scores(&obs(&rows), &TaxonomyOptions::default()).unwrap();
        let by: BTreeMap<HeadId, &TaxonomyScore> = scores.iter().map(|s| (s.head, s)).collect();
        assert_abs_diff_eq!(by[&copy].induction, 1.0);
        assert!(by[&copy].is_induction && !by[&copy].is_previous);
        assert_abs_diff_eq!(by[&uniform].induction, 0.02, epsilon = 1e-12);
        assert_abs_diff_eq!(by[&uniform].previous, 0.02, epsilon = 1e-12);
    }

    #[test]
    fn overlap_and_calibration() {
        let a = HeadId::new(0, 0);
        let b = HeadId::new(1, 1);
        let rows = [(a, "induction", 0.5), (a, "previous", 0.5), (b, "induction", 0.0), (b, "previous", 0.0)];
        let opts = TaxonomyOptions { expected_counts: Some((5, 1)), ..TaxonomyOptions::default() };
        let scores = taxonomy_scores(&obs(&rows), &opts).unwrap();
        let summary = taxonomy_summary(&scores, &[b], &opts);
        assert!(!summary.zero_overlap);
        assert_eq!(summary.overlaps[2].2, vec![a]);
        assert_eq!(summary.warnings.len(), 1);
        assert!(summary.warnings[0].contains("induction"));
    }

    #[test]
    fn missing_condition_is_an_error() {
        let rows = [(HeadId::new(0, 0), "induction", 0.5)];
        assert!(taxonomy_scores(&obs(&rows), &TaxonomyOptions::default()).is_err());
    }
}
