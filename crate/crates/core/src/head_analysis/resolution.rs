use std::collections::BTreeMap;

use serde::Serialize;

use super::{Experiment, HeadId, Observations};
use crate::error::{Error, Result};
use crate::model_fit::{fit_candidate, CandidateModel};

/// Level label of the exact-repeat reference.
pub const EXACT_LEVEL: &str = "1.0";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelPoint {
    /// Condition label as it appears in the data (`"0.9"`, `"synonym"`, ...).
    pub label: String,
    /// Parsed cosine level; `None` for non-numeric conditions.
    pub cosine: Option<f64>,
    pub probes: usize,
    pub mean_attention: f64,
    /// Mean over targets of `value / exact-repeat value`.
    pub normalized: f64,
    pub fired: usize,
    pub fp_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmoidFit {
    /// Cosine at which the fitted FP rate crosses one half; `None` when the
    /// profile is flat.
    pub midpoint: Option<f64>,
    /// `1 / scale`, zero for a flat profile.
    pub slope: f64,
    pub rss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolutionProfile {
    pub head: HeadId,
    /// Numeric levels, descending cosine.
    pub levels: Vec<LevelPoint>,
    /// Non-numeric conditions (synonym, control).
    pub extras: Vec<LevelPoint>,
    pub fit: SigmoidFit,
    /// Lowest-similarity run of zero FP: the largest level at and below which
    /// every FP rate is zero.
    pub zero_fp_from: Option<f64>,
    /// Adjacent level pairs where FP rises as similarity falls.
    pub fp_violations: Vec<(f64, f64)>,
    pub attention_violations: Vec<(f64, f64)>,
    /// 1 is the narrowest band (highest midpoint).
    pub bandwidth_rank: Option<usize>,
}

fn point(label: &str, rows: &[(f64, f64)], threshold: f64) -> LevelPoint {
    let n = rows.len() as f64;
    let fired = rows.iter().filter(|r| r.0 > threshold).count();
    LevelPoint {
        label: label.to_string(),
        cosine: label.parse().ok(),
        probes: rows.len(),
        mean_attention: rows.iter().map(|r| r.0).sum::<f64>() / n,
        normalized: rows.iter().map(|r| r.1).sum::<f64>() / n,
        fired,
        fp_rate: fired as f64 / n,
    }
}

fn sigmoid(levels: &[LevelPoint]) -> Result<SigmoidFit> {
    let xy: Vec<(f64, f64)> = levels.iter().filter_map(|p| p.cosine.map(|c| (c, p.fp_rate))).collect();
    let mean = xy.iter().map(|p| p.1).sum::<f64>() / xy.len() as f64;
    let flat = xy.iter().all(|p| (p.1 - mean).abs() < 1e-15);
    if flat || xy.len() < 3 {
        return Ok(SigmoidFit { midpoint: None, slope: 0.0, rss: 0.0 });
    }
    let (params, rss) = fit_candidate(CandidateModel::Logistic, &xy)?;
    Ok(SigmoidFit { midpoint: Some(params[0]), slope: 1.0 / params[1], rss })
}

/// Per-head attention and FP rate as a function of probe-target cosine.
/// Each target's values are normalized by that target's exact-repeat value
/// (condition `1.0`) before averaging.
pub fn resolution_profiles(obs: &Observations, threshold: f64) -> Result<Vec<ResolutionProfile>> {
    // head -> target -> condition -> value
    let mut data: BTreeMap<HeadId, BTreeMap<&str, BTreeMap<&str, f64>>> = BTreeMap::new();
    for r in obs.experiment(Experiment::Resolution) {
        let slot = data.entry(r.head_id()).or_default().entry(&r.sentence_id).or_default();
        if slot.insert(&r.condition, r.value).is_some() {
            return Err(Error::Schema(format!(
                "{} target `{}` has two `{}` records",
                r.head_id(),
                r.sentence_id,
                r.condition
            )));
        }
    }
    if data.is_empty() {
        return Err(Error::MissingData("no resolution records".into()));
    }

    let mut profiles = Vec::new();
    for (head, targets) in data {
        let mut by_cond: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
        for (target, conds) in &targets {
            let Some(&reference) = conds.get(EXACT_LEVEL) else {
                return Err(Error::MissingData(format!("{head} target `{target}` has no exact-repeat record")));
            };
            for (&cond, &v) in conds {
                let norm = if reference > 0.0 { v / reference } else { 0.0 };
                by_cond.entry(cond).or_default().push((v, norm));
            }
        }
        let mut levels = Vec::new();
        let mut extras = Vec::new();
        for (cond, rows) in &by_cond {
            let p = point(cond, rows, threshold);
            if p.cosine.is_some() {
                levels.push(p);
            } else {
                extras.push(p);
            }
        }
        levels.sort_by(|a, b| b.cosine.unwrap().total_cmp(&a.cosine.unwrap()));

        let mut fp_violations = Vec::new();
        let mut attention_violations = Vec::new();
        for w in levels.windows(2) {
            let (hi, lo) = (&w[0], &w[1]);
            let pair = (hi.cosine.unwrap(), lo.cosine.unwrap());
            if lo.fp_rate > hi.fp_rate {
                fp_violations.push(pair);
            }
            if lo.normalized > hi.normalized {
                attention_violations.push(pair);
            }
        }
        let zero_fp_from = levels.iter().rev().take_while(|p| p.fired == 0).last().and_then(|p| p.cosine);
        profiles.push(ResolutionProfile {
            head,
            fit: sigmoid(&levels)?,
            levels,
            extras,
            zero_fp_from,
            fp_violations,
            attention_violations,
            bandwidth_rank: None,
        });
    }

    let mut order: Vec<(usize, f64)> =
        profiles.iter().enumerate().filter_map(|(i, p)| p.fit.midpoint.map(|m| (i, m))).collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(profiles[a.0].head.cmp(&profiles[b.0].head)));
    for (rank, (i, _)) in order.into_iter().enumerate() {
        profiles[i].bandwidth_rank = Some(rank + 1);
    }
    Ok(profiles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::head_analysis::{parse_observations, AttentionObservation, Header};
    use approx::assert_abs_diff_eq;

    fn obs(rows: &[(HeadId, String, String, f64)]) -> Observations {
        let mut text = serde_json::to_string(&Header::new("toy", 2, 2)).unwrap();
        for (h, target, c, v) in rows {
            let r = AttentionObservation {
                model: "toy".into(),
                layer: h.layer,
                head: h.head,
                experiment: Experiment::Resolution,
                sentence_id: target.clone(),
                condition: c.clone(),
                value: *v,
                meta: None,
            };
            text.push('\n');
            text.push_str(&serde_json::to_string(&r).unwrap());
        }
        parse_observations(text.as_bytes()).unwrap()
    }

    const LEVELS: [&str; 11] = ["1.0", "0.9", "0.8", "0.7", "0.6", "0.5", "0.4", "0.3", "0.2", "0.1", "0.0"];

    #[test]
    fn constant_attention_is_flat() {
        let h = HeadId::new(0, 0);
        let rows: Vec<_> =
            (0..5).flat_map(|t| LEVELS.iter().map(move |l| (h, format!("t{t}"), l.to_string(), 0.4))).collect();
        let p = &resolution_profiles(&obs(&rows), 0.1).unwrap()[0];
        assert_eq!(p.fit.slope, 0.0);
        assert!(p.fit.midpoint.is_none());
        assert!(p.levels.iter().all(|l| l.normalized == 1.0 && l.fp_rate == 1.0));
        assert_eq!(p.bandwidth_rank, None);
    }

    #[test]
    fn normalization_is_per_target() {
        let h = HeadId::new(1, 1);
        let rows = vec![
            (h, "a".to_string(), "1.0".to_string(), 0.8),
            (h, "a".to_string(), "0.5".to_string(), 0.4),
            (h, "b".to_string(), "1.0".to_string(), 0.2),
            (h, "b".to_string(), "0.5".to_string(), 0.2),
            (h, "b".to_string(), "synonym".to_string(), 0.05),
        ];
        let p = &resolution_profiles(&obs(&rows), 0.1).unwrap()[0];
        assert_eq!(p.levels[0].normalized, 1.0);
        assert_abs_diff_eq!(p.levels[1].normalized, 0.75, epsilon = 1e-15);
        assert_eq!(p.extras[0].label, "synonym");
        assert_eq!(p.extras[0].fp_rate, 0.0);
    }

    #[test]
    fn missing_reference_rejected() {
        let rows = vec![(HeadId::new(0, 0), "a".to_string(), "0.5".to_string(), 0.4)];
        assert!(matches!(resolution_profiles(&obs(&rows), 0.1), Err(Error::MissingData(_))));
    }

    #[test]
    fn narrower_band_ranks_first() {
        let narrow = HeadId::new(0, 1);
        let broad = HeadId::new(1, 1);
        let mut rows = Vec::new();
        for t in 0..20 {
            for l in LEVELS {
                let c: f64 = l.parse().unwrap();
                let fire = |cut: f64| if c >= cut + 0.02 * f64::from(t % 5) { 0.5 } else { 0.01 };
                rows.push((narrow, format!("t{t}"), l.to_string(), fire(0.85)));
                rows.push((broad, format!("t{t}"), l.to_string(), fire(0.45)));
            }
        }
        let ps = resolution_profiles(&obs(&rows), 0.1).unwrap();
        let by: BTreeMap<HeadId, &ResolutionProfile> = ps.iter().map(|p| (p.head, p)).collect();
        assert_eq!(by[&narrow].bandwidth_rank, Some(1));
        assert_eq!(by[&broad].bandwidth_rank, Some(2));
        assert!(by[&narrow].fit.midpoint.unwrap() > by[&broad].fit.midpoint.unwrap());
        assert!(by[&narrow].fp_violations.is_empty());
        assert_eq!(by[&narrow].zero_fp_from, Some(0.8));
        assert_eq!(by[&broad].zero_fp_from, Some(0.4));
    }
}
