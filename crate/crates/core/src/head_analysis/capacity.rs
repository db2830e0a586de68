use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::independence::INDEPENDENCE_CONDITION;
use super::{Experiment, HeadId, Observations};
use crate::error::{invalid, Error, Result};
use crate::model_fit::{CapacityCurve, CapacityPoint};

/// A head firing at least this often at every load attends to the whole
/// prefix rather than testing membership.
pub const PREFIX_ATTENTION_FLOOR: f64 = 0.95;
/// FP spread across sequence lengths above which a head is length-sensitive.
pub const LENGTH_SENSITIVITY_RANGE: f64 = 0.1;

const LENGTH_PREFIX: &str = "len=";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CapacityCell {
    pub n_unique: u32,
    pub fired: usize,
    pub probes: usize,
}

impl CapacityCell {
    pub fn fp_rate(&self) -> f64 {
        self.fired as f64 / self.probes as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityTable {
    pub threshold: f64,
    pub levels: Vec<u32>,
    pub cells: BTreeMap<HeadId, Vec<CapacityCell>>,
    /// Heads lacking some of the load levels seen elsewhere.
    pub missing: BTreeMap<HeadId, Vec<u32>>,
    pub warnings: Vec<String>,
}

impl CapacityTable {
    pub fn curve(&self, head: HeadId) -> Option<CapacityCurve> {
        let cells = self.cells.get(&head)?;
        let points = cells.iter().map(|c| CapacityPoint { n_unique: c.n_unique, fp_rate: c.fp_rate() }).collect();
        CapacityCurve::new(head, points).ok()
    }

    /// Fires on at least [`PREFIX_ATTENTION_FLOOR`] of probes at every load.
    pub fn prefix_attention(&self, head: HeadId) -> bool {
        self.cells.get(&head).is_some_and(|c| !c.is_empty() && c.iter().all(|c| c.fp_rate() >= PREFIX_ATTENTION_FLOOR))
    }

    pub fn prefix_attention_heads(&self) -> Vec<HeadId> {
        self.cells.keys().copied().filter(|&h| self.prefix_attention(h)).collect()
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(invalid(format!("fp threshold must be in (0,1), got {threshold}")));
    }
    Ok(())
}

/// Count probes per (head, load) so that rates are exact fractions.
fn tally<'a>(
    records: impl Iterator<Item = (HeadId, u32, f64)> + 'a,
    threshold: f64,
) -> BTreeMap<HeadId, BTreeMap<u32, (usize, usize)>> {
    let mut out: BTreeMap<HeadId, BTreeMap<u32, (usize, usize)>> = BTreeMap::new();
    for (h, level, v) in records {
        let slot = out.entry(h).or_default().entry(level).or_default();
        slot.1 += 1;
        if v > threshold {
            slot.0 += 1;
        }
    }
    out
}

/// FP rate per (head, unique-token load): the fraction of probe records whose
/// prefix attention exceeds `threshold`. Load conditions are plain integers;
/// `len=N` conditions belong to the length control and are skipped here.
pub fn capacity_fp_table(obs: &Observations, threshold: f64) -> Result<CapacityTable> {
    check_threshold(threshold)?;
    let mut ignored = BTreeSet::new();
    let loads = obs.experiment(Experiment::Capacity).filter_map(|r| {
        if r.condition.starts_with(LENGTH_PREFIX) || r.condition == INDEPENDENCE_CONDITION {
            return None;
        }
        match r.condition.parse::<u32>() {
            Ok(n) => Some((r.head_id(), n, r.value)),
            Err(_) => {
                ignored.insert(r.condition.clone());
                None
            }
        }
    });
    let counts = tally(loads, threshold);
    if counts.is_empty() {
        return Err(Error::MissingData("no capacity records with integer load conditions".into()));
    }
    let levels: BTreeSet<u32> = counts.values().flat_map(|m| m.keys().copied()).collect();
    let mut missing = BTreeMap::new();
    let mut warnings: Vec<String> = ignored.iter().map(|c| format!("ignored capacity condition `{c}`")).collect();
    let cells = counts
        .into_iter()
        .map(|(h, by_level)| {
            let absent: Vec<u32> = levels.iter().copied().filter(|l| !by_level.contains_key(l)).collect();
            if !absent.is_empty() {
                warnings.push(format!("{h} is missing load levels {absent:?}"));
                missing.insert(h, absent);
            }
            let cells = by_level
                .into_iter()
                .map(|(n_unique, (fired, probes))| CapacityCell { n_unique, fired, probes })
                .collect();
            (h, cells)
        })
        .collect();
    Ok(CapacityTable { threshold, levels: levels.into_iter().collect(), cells, missing, warnings })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthSeries {
    pub head: HeadId,
    /// `(sequence length, fired, probes)`
    pub points: Vec<(u32, usize, usize)>,
    pub range: f64,
    pub length_sensitive: bool,
}

impl LengthSeries {
    pub fn rates(&self) -> Vec<(u32, f64)> {
        self.points.iter().map(|&(l, f, p)| (l, f as f64 / p as f64)).collect()
    }
}

/// FP rate against total sequence length at a fixed unique-token load, from
/// capacity records with `len=N` conditions.
pub fn sequence_length_control(obs: &Observations, threshold: f64) -> Result<Vec<LengthSeries>> {
    check_threshold(threshold)?;
    let lengths = obs.experiment(Experiment::Capacity).filter_map(|r| {
        let len = r.condition.strip_prefix(LENGTH_PREFIX)?.parse::<u32>().ok()?;
        Some((r.head_id(), len, r.value))
    });
    Ok(tally(lengths, threshold)
        .into_iter()
        .map(|(head, by_len)| {
            let points: Vec<(u32, usize, usize)> = by_len.into_iter().map(|(l, (f, p))| (l, f, p)).collect();
            let rates = points.iter().map(|&(_, f, p)| f as f64 / p as f64);
            let (lo, hi) = rates.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
            let range = hi - lo;
            LengthSeries { head, points, range, length_sensitive: range > LENGTH_SENSITIVITY_RANGE }
        })
        .collect())
}
