use rand::Rng as _;
use serde::Serialize;

use super::{mean, quantile_sorted};
use crate::error::{invalid, Error, Result};
use crate::rng;

/// Percentile bootstrap interval around a plug-in estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
    pub level: f64,
    pub resamples: usize,
}

impl ConfidenceInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }

    fn from_draws(estimate: f64, mut draws: Vec<f64>, level: f64) -> Self {
        let resamples = draws.len();
        draws.sort_by(f64::total_cmp);
        let tail = (1.0 - level) / 2.0;
        let low = quantile_sorted(&draws, tail);
        let high = quantile_sorted(&draws, 1.0 - tail);
        Self {
            estimate,
            // a skewed resampling distribution can leave the plug-in value
            // outside the raw percentile band
            low: low.min(estimate),
            high: high.max(estimate),
            level,
            resamples,
        }
    }
}

fn check(samples: &[f64], what: &str, level: f64, resamples: usize) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::EmptyInput(format!("bootstrap sample `{what}`")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid(format!("confidence level must be in (0,1), got {level}")));
    }
    if resamples == 0 {
        return Err(invalid("resamples must be >= 1"));
    }
    Ok(())
}

fn resample_mean(xs: &[f64], rng: &mut rng::Rng) -> f64 {
    let n = xs.len();
    let mut sum = 0.0;
    for _ in 0..n {
        sum += xs[rng.random_range(0..n)];
    }
    sum / n as f64
}

/// Percentile interval for the mean.
pub fn bootstrap_ci(samples: &[f64], level: f64, resamples: usize, seed: u64) -> Result<ConfidenceInterval> {
    check(samples, "samples", level, resamples)?;
    let mut rng = rng::seeded(seed);
    let draws = (0..resamples).map(|_| resample_mean(samples, &mut rng)).collect();
    Ok(ConfidenceInterval::from_draws(mean(samples), draws, level))
}

/// Percentile interval for `mean(numerator) / mean(denominator)`, resampling
/// the two groups independently.
pub fn bootstrap_ratio_ci(
    numerator: &[f64],
    denominator: &[f64],
    level: f64,
    resamples: usize,
    seed: u64,
) -> Result<ConfidenceInterval> {
    check(numerator, "numerator", level, resamples)?;
    check(denominator, "denominator", level, resamples)?;
    let mut rng = rng::seeded(seed);
    let draws = (0..resamples)
        .map(|_| {
            let num = resample_mean(numerator, &mut rng);
            num / resample_mean(denominator, &mut rng)
        })
        .collect();
    Ok(ConfidenceInterval::from_draws(mean(numerator) / mean(denominator), draws, level))
}

/// Percentile interval for `mean(a) - mean(b)` with independent resampling.
pub fn bootstrap_diff_ci(a: &[f64], b: &[f64], level: f64, resamples: usize, seed: u64) -> Result<ConfidenceInterval> {
    check(a, "a", level, resamples)?;
    check(b, "b", level, resamples)?;
    let mut rng = rng::seeded(seed);
    let draws = (0..resamples)
        .map(|_| {
            let ma = resample_mean(a, &mut rng);
            ma - resample_mean(b, &mut rng)
        })
        .collect();
    Ok(ConfidenceInterval::from_draws(mean(a) - mean(b), draws, level))
}
