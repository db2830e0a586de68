use serde::Serialize;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AndCombination {
    pub probes: usize,
    pub per_filter_rates: Vec<f64>,
    /// Fraction of probes positive on every filter.
    pub combined_rate: f64,
    /// Product of the individual rates (the independence prediction).
    pub predicted_rate: f64,
}

/// AND-combine per-probe verdicts, one list per filter.
pub fn and_combine_verdicts(verdicts: &[Vec<bool>]) -> Result<AndCombination> {
    let Some(first) = verdicts.first() else {
        return Err(Error::EmptyInput("no verdict lists".into()));
    };
    let probes = first.len();
    if probes == 0 {
        return Err(Error::EmptyInput("verdict lists are empty".into()));
    }
    if verdicts.iter().any(|v| v.len() != probes) {
        return Err(invalid("verdict lists differ in length"));
    }
    let per_filter_rates: Vec<f64> =
        verdicts.iter().map(|v| v.iter().filter(|&&b| b).count() as f64 / probes as f64).collect();
    let all = (0..probes).filter(|&i| verdicts.iter().all(|v| v[i])).count();
    Ok(AndCombination {
        probes,
        predicted_rate: per_filter_rates.iter().product(),
        per_filter_rates,
        combined_rate: all as f64 / probes as f64,
    })
}
