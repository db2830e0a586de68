use serde::Serialize;

use super::signature::MISS_THRESHOLD;
use super::{Experiment, HeadId, Observations};
use crate::error::{Error, Result};
use crate::stats;

pub const REPEATED: &str = "repeated";
pub const NONREPEATED: &str = "nonrepeated";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NaturalisticMetrics {
    pub head: HeadId,
    pub repeat_pairs: usize,
    pub nonrepeated: usize,
    pub repeated_mean: f64,
    pub nonrepeated_mean: f64,
    pub selectivity: f64,
    pub selectivity_infinite: bool,
    pub misses: usize,
    pub miss_rate: f64,
}

/// Selectivity of repeated-pair attention over non-repeated attention on
/// natural text, with the miss rate at the fixed 0.01 threshold.
pub fn naturalistic_metrics(obs: &Observations) -> Result<Vec<NaturalisticMetrics>> {
    let rep = obs.values(Experiment::Naturalistic, REPEATED);
    let non = obs.values(Experiment::Naturalistic, NONREPEATED);
    let heads = obs.heads(Experiment::Naturalistic);
    if heads.is_empty() {
        return Err(Error::MissingData("no naturalistic records".into()));
    }
    heads
        .into_iter()
        .map(|h| {
            let (Some(r), Some(n)) = (rep.get(&h), non.get(&h)) else {
                return Err(Error::MissingData(format!("{h} needs `{REPEATED}` and `{NONREPEATED}` records")));
            };
            let repeated_mean = stats::mean(r);
            let nonrepeated_mean = stats::mean(n);
            let infinite = nonrepeated_mean == 0.0;
            let misses = r.iter().filter(|&&v| v < MISS_THRESHOLD).count();
            Ok(NaturalisticMetrics {
                head: h,
                repeat_pairs: r.len(),
                nonrepeated: n.len(),
                repeated_mean,
                nonrepeated_mean,
                selectivity: if infinite { f64::INFINITY } else { repeated_mean / nonrepeated_mean },
                selectivity_infinite: infinite,
                misses,
                miss_rate: misses as f64 / r.len() as f64,
            })
        })
        .collect()
}
