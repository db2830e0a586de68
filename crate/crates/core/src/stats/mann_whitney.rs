use statrs::distribution::{ContinuousCDF, Normal};

use super::{Alternative, Method, TestResult};

/// Combined sample size at or below which the permutation distribution of U
/// is enumerated exactly.
pub const EXACT_LIMIT: usize = 12;

/// Mann-Whitney U test of `x` against `y`.
///
/// The statistic is `U_x = R_x - n_x(n_x+1)/2` over mid-ranks of the pooled
/// sample. `Greater` tests whether `x` tends to exceed `y`. Combined samples
/// up to [`EXACT_LIMIT`] use the exact conditional distribution (ties
/// included); larger ones use the normal approximation.
pub fn mann_whitney_u(x: &[f64], y: &[f64], alternative: Alternative) -> TestResult {
    if !x.is_empty() && !y.is_empty() && x.len() + y.len() <= EXACT_LIMIT {
        mann_whitney_exact(x, y, alternative)
    } else {
        mann_whitney_normal(x, y, alternative)
    }
}

fn u_statistic(x: &[f64], y: &[f64]) -> (f64, Vec<f64>, f64) {
    let nx = x.len();
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let (ranks, tie_term) = mid_ranks(&pooled);
    let rank_sum: f64 = ranks[..nx].iter().sum();
    (rank_sum - (nx * (nx + 1)) as f64 / 2.0, ranks, tie_term)
}

/// Exact p-value by enumerating every assignment of the pooled mid-ranks.
/// Cost grows as `C(n_x + n_y, n_x)`.
pub fn mann_whitney_exact(x: &[f64], y: &[f64], alternative: Alternative) -> TestResult {
    if x.is_empty() || y.is_empty() {
        return TestResult::new(f64::NAN, 1.0, Method::MannWhitneyExact, alternative);
    }
    let (u, ranks, _) = u_statistic(x, y);
    let p = exact_p(&ranks, x.len(), u, alternative);
    TestResult::new(u, p, Method::MannWhitneyExact, alternative)
}

/// Normal approximation with tie-corrected variance and a 0.5 continuity
/// correction.
pub fn mann_whitney_normal(x: &[f64], y: &[f64], alternative: Alternative) -> TestResult {
    if x.is_empty() || y.is_empty() {
        return TestResult::new(f64::NAN, 1.0, Method::MannWhitneyNormal, alternative);
    }
    let (u, _, tie_term) = u_statistic(x, y);
    let (nxf, nyf) = (x.len() as f64, y.len() as f64);
    let n = nxf + nyf;
    let mu = nxf * nyf / 2.0;
    let var = nxf * nyf / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return TestResult::new(u, 1.0, Method::MannWhitneyNormal, alternative);
    }
    let sd = var.sqrt();
    let normal = Normal::standard();
    let p = match alternative {
        Alternative::Greater => normal.sf((u - mu - 0.5) / sd),
        Alternative::Less => normal.cdf((u - mu + 0.5) / sd),
        Alternative::TwoSided => {
            let z = ((u - mu).abs() - 0.5).max(0.0) / sd;
            (2.0 * normal.sf(z)).min(1.0)
        }
    };
    TestResult::new(u, p, Method::MannWhitneyNormal, alternative)
}

/// Mid-ranks (1-based) and the tie term `sum(t^3 - t)`.
fn mid_ranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    (ranks, tie_term)
}

/// Enumerate every way of labelling `nx` of the pooled ranks as `x`.
fn exact_p(ranks: &[f64], nx: usize, u_obs: f64, alternative: Alternative) -> f64 {
    let n = ranks.len();
    let offset = (nx * (nx + 1)) as f64 / 2.0;
    let mu = (nx * (n - nx)) as f64 / 2.0;
    let eps = 1e-9;
    let mut hits = 0u64;
    let mut total = 0u64;
    let mut idx: Vec<usize> = (0..nx).collect();
    loop {
        let u = idx.iter().map(|&i| ranks[i]).sum::<f64>() - offset;
        total += 1;
        let extreme = match alternative {
            Alternative::Greater => u >= u_obs - eps,
            Alternative::Less => u <= u_obs + eps,
            Alternative::TwoSided => (u - mu).abs() >= (u_obs - mu).abs() - eps,
        };
        if extreme {
            hits += 1;
        }
        if !next_combination(&mut idx, n) {
            break;
        }
    }
    hits as f64 / total as f64
}

/// Advance `idx` to the next k-combination of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
