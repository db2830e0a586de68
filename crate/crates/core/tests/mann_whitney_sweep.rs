//! Exhaustive comparison of the exact and normal-approximation Mann-Whitney
//! p-values on small samples.

use bloomhead::stats::{mann_whitney_exact, mann_whitney_normal, Alternative};

/// Every split of ranks `1..=total` into groups of `nx` and `total - nx`.
fn splits(total: usize, nx: usize) -> impl Iterator<Item = (Vec<f64>, Vec<f64>)> {
    (0u32..(1 << total)).filter(move |m| m.count_ones() as usize == nx).map(move |mask| {
        let pick = |bit: u32| (0..total).filter(|&i| mask >> i & 1 == bit).map(|i| (i + 1) as f64).collect();
        (pick(1), pick(0))
    })
}

fn worst_gap(total: usize, min_group: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for nx in min_group..=total - min_group {
        for (x, y) in splits(total, nx) {
            for alt in [Alternative::Greater, Alternative::Less, Alternative::TwoSided] {
                let gap = (mann_whitney_exact(&x, &y, alt).p_value - mann_whitney_normal(&x, &y, alt).p_value).abs();
                worst = worst.max(gap);
            }
        }
    }
    worst
}

#[test]
fn agreement_at_the_exact_limit_with_balanced_groups() {
    let gap = worst_gap(12, 4);
    assert!(gap <= 0.02, "worst gap {gap}");
}

#[test]
fn tiny_samples_disagree_beyond_two_points() {
    // The normal tail is poor with a handful of observations, which is why
    // small samples go through enumeration.
    let x = [3.0, 4.0, 5.0];
    let y = [1.0, 2.0];
    let exact = mann_whitney_exact(&x, &y, Alternative::Greater).p_value;
    let normal = mann_whitney_normal(&x, &y, Alternative::Greater).p_value;
    assert!((exact - 0.1).abs() < 1e-12);
    assert!((exact - normal).abs() > 0.02);
    let overall = (4..=12).map(|n| worst_gap(n, 1)).fold(0.0, f64::max);
    assert!(overall > 0.1 && overall < 0.15, "{overall}");
}

/// `#(x > y) + 0.5 #(x == y)` over all pairs.
fn pairwise_u(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .flat_map(|a| {
            y.iter().map(move |b| {
                if a > b {
                    1.0
                } else if a == b {
                    0.5
                } else {
                    0.0
                }
            })
        })
        .sum()
}

#[test]
fn ties_match_pairwise_enumeration() {
    let x = [1.0, 2.0, 2.0, 3.0];
    let y = [2.0, 2.0, 0.5];
    let pooled: Vec<f64> = x.iter().chain(&y).copied().collect();
    let u_obs = pairwise_u(&x, &y);
    let (mut hits, mut total) = (0, 0);
    for mask in 0u32..(1 << pooled.len()) {
        if mask.count_ones() as usize != x.len() {
            continue;
        }
        let a: Vec<f64> = (0..pooled.len()).filter(|i| mask >> i & 1 == 1).map(|i| pooled[i]).collect();
        let b: Vec<f64> = (0..pooled.len()).filter(|i| mask >> i & 1 == 0).map(|i| pooled[i]).collect();
        total += 1;
        if pairwise_u(&a, &b) >= u_obs - 1e-9 {
            hits += 1;
        }
    }
    let r = mann_whitney_exact(&x, &y, Alternative::Greater);
    assert_eq!(r.statistic, u_obs);
    assert!((r.p_value - f64::from(hits) / f64::from(total)).abs() < 1e-12);
}
