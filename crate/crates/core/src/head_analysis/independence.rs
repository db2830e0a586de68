use std::collections::BTreeMap;

use serde::Serialize;

use super::{Experiment, HeadId, Observations};
use crate::ds_filters::{and_combine_verdicts, AndCombination};
use crate::error::{invalid, Error, Result};
use crate::stats::{phi_coefficient, TwoByTwo};

/// Capacity-experiment condition holding per-probe total prefix attention.
pub const INDEPENDENCE_CONDITION: &str = "probe";

/// Thresholds always reported alongside the main analysis.
pub const SWEEP_THRESHOLDS: [f64; 5] = [0.01, 0.05, 0.1, 0.15, 0.2];

/// Raw prefix attention, one row per probe, one column per head.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSet {
    pub heads: Vec<HeadId>,
    pub probes: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeVerdict {
    pub probe_id: String,
    /// Aligned with [`ProbeSet::heads`].
    pub fired: Vec<bool>,
    pub threshold: f64,
}

impl ProbeSet {
    pub fn verdicts(&self, threshold: f64) -> Vec<ProbeVerdict> {
        self.probes
            .iter()
            .map(|(id, values)| ProbeVerdict {
                probe_id: id.clone(),
                fired: values.iter().map(|&v| v > threshold).collect(),
                threshold,
            })
            .collect()
    }
}

/// Gather independence probes for `heads` (all heads with probe records when
/// empty). Every probe must carry exactly one value per head.
pub fn probe_set(obs: &Observations, heads: &[HeadId]) -> Result<ProbeSet> {
    let mut table: BTreeMap<&str, BTreeMap<HeadId, f64>> = BTreeMap::new();
    for r in obs.experiment(Experiment::Capacity).filter(|r| r.condition == INDEPENDENCE_CONDITION) {
        if table.entry(&r.sentence_id).or_default().insert(r.head_id(), r.value).is_some() {
            return Err(Error::Schema(format!("probe `{}` has two records for {}", r.sentence_id, r.head_id())));
        }
    }
    if table.is_empty() {
        return Err(Error::MissingData(format!("no capacity records with condition `{INDEPENDENCE_CONDITION}`")));
    }
    let heads: Vec<HeadId> = if heads.is_empty() {
        let mut all: Vec<HeadId> = table.values().flat_map(|m| m.keys().copied()).collect();
        all.sort();
        all.dedup();
        all
    } else {
        heads.to_vec()
    };
    let probes = table
        .into_iter()
        .map(|(id, by_head)| {
            let values = heads
                .iter()
                .map(|h| {
                    by_head
                        .get(h)
                        .copied()
                        .ok_or_else(|| Error::MissingData(format!("probe `{id}` has no record for {h}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((id.to_string(), values))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbeSet { heads, probes })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairPhi {
    pub a: HeadId,
    pub b: HeadId,
    pub table: TwoByTwo,
    /// `None` when a marginal is zero.
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub heads: Vec<HeadId>,
    pub threshold: f64,
    pub probes: usize,
    pub pairs: Vec<PairPhi>,
    /// Mean over pairs with a defined phi.
    pub mean_phi: Option<f64>,
    pub combined: AndCombination,
    /// `histogram[j]` = probes on which exactly `j` heads fired.
    pub histogram: Vec<usize>,
    /// `(heads used, observed AND rate, product of individual rates)` for
    /// the first 1..=H heads in order.
    pub cascade: Vec<(usize, f64, f64)>,
    pub warnings: Vec<String>,
}

impl IndependenceReport {
    pub fn histogram_fractions(&self) -> Vec<f64> {
        self.histogram.iter().map(|&c| c as f64 / self.probes as f64).collect()
    }
}

pub fn independence_analysis(heads: &[HeadId], verdicts: &[ProbeVerdict]) -> Result<IndependenceReport> {
    if heads.len() < 2 {
        return Err(invalid("independence analysis needs at least two heads"));
    }
    let Some(first) = verdicts.first() else {
        return Err(Error::EmptyInput("no probe verdicts".into()));
    };
    if let Some(v) = verdicts.iter().find(|v| v.fired.len() != heads.len()) {
        return Err(invalid(format!(
            "probe `{}` has {} verdicts for {} heads",
            v.probe_id,
            v.fired.len(),
            heads.len()
        )));
    }
    let columns: Vec<Vec<bool>> = (0..heads.len()).map(|j| verdicts.iter().map(|v| v.fired[j]).collect()).collect();

    let mut pairs = Vec::new();
    let mut warnings = Vec::new();
    for i in 0..heads.len() {
        for j in i + 1..heads.len() {
            let table = TwoByTwo::from_pairs(&columns[i], &columns[j])?;
            let phi = phi_coefficient(&table);
            if phi.is_none() {
                warnings.push(format!("phi undefined for {} / {}: a marginal is zero", heads[i], heads[j]));
            }
            pairs.push(PairPhi { a: heads[i], b: heads[j], table, phi });
        }
    }
    let defined: Vec<f64> = pairs.iter().filter_map(|p| p.phi).collect();
    let mean_phi = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);

    let mut histogram = vec![0; heads.len() + 1];
    for v in verdicts {
        histogram[v.fired.iter().filter(|&&b| b).count()] += 1;
    }
    let cascade = (1..=heads.len())
        .map(|k| {
            let c = and_combine_verdicts(&columns[..k])?;
            Ok((k, c.combined_rate, c.predicted_rate))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(IndependenceReport {
        heads: heads.to_vec(),
        threshold: first.threshold,
        probes: verdicts.len(),
        pairs,
        mean_phi,
        combined: and_combine_verdicts(&columns)?,
        histogram,
        cascade,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub mean_phi: Option<f64>,
    pub combined_rate: f64,
    pub none_fired: f64,
    pub all_fired: f64,
}

pub fn threshold_sweep(set: &ProbeSet, thresholds: &[f64]) -> Result<Vec<SweepRow>> {
    thresholds
        .iter()
        .map(|&t| {
            let r = independence_analysis(&set.heads, &set.verdicts(t))?;
            let fr = r.histogram_fractions();
            Ok(SweepRow {
                threshold: t,
                mean_phi: r.mean_phi,
                combined_rate: r.combined.combined_rate,
                none_fired: fr[0],
                all_fired: fr[fr.len() - 1],
            })
        })
        .collect()
}
