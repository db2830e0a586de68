//! Nonparametric statistics used by the head analyses: percentile bootstrap,
//! Mann-Whitney U, exact binomial tails, group permutation tests, Cohen's d,
//! phi coefficients and Bonferroni thresholds.
//!
//! Every resampling routine is driven by an explicit seed and is
//! bit-reproducible for identical inputs.

mod bootstrap;
mod effect;
mod mann_whitney;
mod tests_exact;

pub use bootstrap::{bootstrap_ci, bootstrap_diff_ci, bootstrap_ratio_ci, ConfidenceInterval};
pub use effect::{bonferroni_threshold, cohens_d, phi_coefficient, EffectSize, TwoByTwo};
pub use mann_whitney::{mann_whitney_exact, mann_whitney_normal, mann_whitney_u, EXACT_LIMIT};
pub use tests_exact::{binomial_tail, permutation_group_test};

use serde::Serialize;

/// Reported p-values are floored here; asymptotic tails below it carry no
/// information at the sample sizes involved.
pub const P_VALUE_FLOOR: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    Greater,
    Less,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    MannWhitneyExact,
    MannWhitneyNormal,
    BinomialExact,
    Permutation,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::MannWhitneyExact => "mann-whitney-exact",
            Method::MannWhitneyNormal => "mann-whitney-normal",
            Method::BinomialExact => "binomial-exact",
            Method::Permutation => "permutation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    /// Clamped to `[P_VALUE_FLOOR, 1]`.
    pub p_value: f64,
    /// True when the raw p-value was below [`P_VALUE_FLOOR`].
    pub capped: bool,
    pub method: Method,
    pub alternative: Alternative,
}

impl TestResult {
    pub(crate) fn new(statistic: f64, raw_p: f64, method: Method, alternative: Alternative) -> Self {
        let raw_p = raw_p.clamp(0.0, 1.0);
        Self { statistic, p_value: raw_p.max(P_VALUE_FLOOR), capped: raw_p < P_VALUE_FLOOR, method, alternative }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with an `n - 1` denominator.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let mu = mean(xs);
    xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn sample_sd(xs: &[f64]) -> f64 {
    sample_variance(xs).sqrt()
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}
