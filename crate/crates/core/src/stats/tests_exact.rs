use rand::seq::index;
use statrs::distribution::{Binomial, DiscreteCDF};

use super::{mean, Alternative, Method, TestResult};
use crate::error::{invalid, Result};
use crate::rng;

/// Exact binomial tail for `successes` out of `trials` under rate `p0`.
///
/// `Less` gives `P(X <= successes)`, `Greater` gives `P(X >= successes)`, and
/// `TwoSided` doubles the smaller tail.
pub fn binomial_tail(successes: u64, trials: u64, p0: f64, alternative: Alternative) -> Result<TestResult> {
    if successes > trials {
        return Err(invalid(format!("successes {successes} exceed trials {trials}")));
    }
    if !(0.0..=1.0).contains(&p0) {
        return Err(invalid(format!("p0 must be in [0,1], got {p0}")));
    }
    let dist = Binomial::new(p0, trials).map_err(|e| invalid(e.to_string()))?;
    let lower = dist.cdf(successes);
    let upper = if successes == 0 { 1.0 } else { dist.sf(successes - 1) };
    let p = match alternative {
        Alternative::Less => lower,
        Alternative::Greater => upper,
        Alternative::TwoSided => (2.0 * lower.min(upper)).min(1.0),
    };
    Ok(TestResult::new(successes as f64, p, Method::BinomialExact, alternative))
}

/// Is the mean over `group` extreme among random groups of the same size?
///
/// `p = (b + 1) / (B + 1)` where `b` counts random groups whose mean is at
/// least the observed group mean.
pub fn permutation_group_test(values: &[f64], group: &[usize], resamples: usize, seed: u64) -> Result<TestResult> {
    let n = values.len();
    let g = group.len();
    if g == 0 {
        return Err(invalid("group is empty"));
    }
    if g > n {
        return Err(invalid(format!("group of {g} exceeds population of {n}")));
    }
    if let Some(&bad) = group.iter().find(|&&i| i >= n) {
        return Err(invalid(format!("group index {bad} out of range 0..{n}")));
    }
    let mut seen = group.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != g {
        return Err(invalid("group contains duplicate indices"));
    }
    if resamples == 0 {
        return Err(invalid("resamples must be >= 1"));
    }

    let observed_sum: f64 = group.iter().map(|&i| values[i]).sum();
    let tol = 1e-12 * observed_sum.abs().max(1.0);
    let mut rng = rng::seeded(seed);
    let mut exceed = 0usize;
    for _ in 0..resamples {
        let sum: f64 = index::sample(&mut rng, n, g).iter().map(|i| values[i]).sum();
        if sum >= observed_sum - tol {
            exceed += 1;
        }
    }
    let p = (exceed + 1) as f64 / (resamples + 1) as f64;
    let observed_mean = mean(&group.iter().map(|&i| values[i]).collect::<Vec<_>>());
    Ok(TestResult::new(observed_mean, p, Method::Permutation, Alternative::Greater))
}
