use super::*;
use approx::assert_abs_diff_eq;
use rand_distr::{Distribution, Normal};

use crate::filters::{theoretical_fp, FilterParams};
use crate::rng;

fn bloom_points(m: f64, k: f64, loads: &[f64]) -> Vec<(f64, f64)> {
    loads.iter().map(|&n| (n, theoretical_fp(&FilterParams::new(m, k, n).unwrap()).unwrap())).collect()
}

const L1H11: [(f64, f64); 5] = [(5.0, 0.627), (20.0, 0.973), (50.0, 1.0), (100.0, 1.0), (180.0, 1.0)];

#[test]
fn candidate_forms() {
    assert_abs_diff_eq!(eval_candidate_model("linear", &[0.0, 0.01], 50.0).unwrap(), 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(eval_candidate_model("dilution", &[5.0], 5.0).unwrap(), 0.5, epsilon = 1e-15);
    let bloom = eval_candidate_model("bloom", &[5.0, 0.86], 20.0).unwrap();
    let direct = (1.0 - f64::exp(-0.86 * 20.0 / 5.0)).powf(0.86);
    assert_abs_diff_eq!(bloom, direct, epsilon = 1e-15);
    assert_abs_diff_eq!(bloom, 0.972, epsilon = 1e-3);
    assert_abs_diff_eq!(eval_candidate_model("logistic", &[10.0, 2.0], 10.0).unwrap(), 0.5, epsilon = 1e-15);
    assert_eq!(eval_candidate_model("power", &[0.5, 1.0], 10.0).unwrap(), 1.0);
    assert_eq!(eval_candidate_model("linear", &[-1.0, 0.0], 3.0).unwrap(), 0.0);
}

#[test]
fn unknown_label_and_bad_params() {
    assert!(matches!(eval_candidate_model("softmax", &[1.0], 1.0), Err(Error::UnknownModel(_))));
    assert!(eval_candidate_model("bloom", &[5.0], 1.0).is_err());
    assert!(eval_candidate_model("bloom", &[-5.0, 1.0], 1.0).is_err());
    assert!(eval_candidate_model("logistic", &[1.0, 0.0], 1.0).is_err());
}

#[test]
fn recovers_bloom_parameters() {
    let pts = bloom_points(10.0, 2.0, &[1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 15.0, 20.0, 30.0, 45.0]);
    let fit = fit_bloom_curve(&pts).unwrap();
    assert!((fit.m / 10.0 - 1.0).abs() < 0.01, "{fit:?}");
    assert!((fit.k / 2.0 - 1.0).abs() < 0.01, "{fit:?}");
    assert!(fit.r_squared.unwrap() >= 0.9999);
}

#[test]
fn noiseless_bloom_r_squared() {
    for (m, k) in [(5.0, 0.86), (64.0, 3.0), (200.0, 1.5)] {
        let loads: Vec<f64> = (1..=12).map(|i| m * f64::from(i) / 4.0).collect();
        let fit = fit_bloom_curve(&bloom_points(m, k, &loads)).unwrap();
        assert!(fit.r_squared.unwrap() >= 0.9999, "m={m} k={k}: {fit:?}");
    }
}

#[test]
fn l1h11_capacity_points() {
    let fit = fit_bloom_curve(&L1H11).unwrap();
    assert!((4.0..=6.0).contains(&fit.m), "{fit:?}");
    assert!((0.66..=1.06).contains(&fit.k), "{fit:?}");
    assert!(fit.r_squared.unwrap() >= 0.99);
    assert!(!fit.non_identifiable);
}

#[test]
fn flat_curve_is_non_identifiable() {
    let pts: Vec<(f64, f64)> = [5.0, 20.0, 50.0, 100.0, 180.0].iter().map(|&n| (n, 1.0)).collect();
    let fit = fit_bloom_curve(&pts).unwrap();
    assert!(fit.non_identifiable);
    assert!(fit.r_squared.is_none());
    let cmp = compare_models_aic(&pts).unwrap();
    assert!(cmp.warnings.iter().any(|w| w.contains("flat")));
}

#[test]
fn rejects_bad_points() {
    assert!(fit_bloom_curve(&[(1.0, 0.1), (2.0, 0.2)]).is_err());
    assert!(fit_bloom_curve(&[(1.0, 0.1), (2.0, 1.2), (3.0, 0.5)]).is_err());
    assert!(compare_models_aic(&L1H11[..3]).is_err());
}

#[test]
fn l1h11_comparison_warns_low_power() {
    let cmp = compare_models_aic(&L1H11).unwrap();
    assert!(cmp.low_power());
    assert!(cmp.warnings.iter().any(|w| w.contains("low statistical power")));
    assert!(cmp.score(CandidateModel::Bloom).unwrap().r_squared.unwrap() >= 0.99);
    for s in &cmp.scores {
        assert!(s.aic.is_finite() && s.bic.is_finite());
    }
    assert_eq!(cmp.best, cmp.scores[0].model);
    assert!(cmp.delta_aic >= 0.0);
}

#[test]
fn aic_matches_definition() {
    let pts = bloom_points(10.0, 2.0, &[2.0, 5.0, 9.0, 14.0, 20.0, 30.0]);
    let noisy: Vec<(f64, f64)> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| (p.0, (p.1 + if i % 2 == 0 { 0.01 } else { -0.01 }).clamp(0.0, 1.0)))
        .collect();
    let cmp = compare_models_aic(&noisy).unwrap();
    let n = noisy.len() as f64;
    for s in &cmp.scores {
        let rss: f64 = noisy.iter().map(|&(x, y)| (y - s.model.eval(&s.params, x).unwrap()).powi(2)).sum();
        assert_abs_diff_eq!(rss, s.rss, epsilon = 1e-12);
        let p = s.model.param_count() as f64;
        let r = s.rss.max(RSS_FLOOR);
        assert_abs_diff_eq!(s.aic, 2.0 * p + n * (r / n).ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(s.bic, p * n.ln() + n * (r / n).ln(), epsilon = 1e-9);
    }
}

#[test]
fn exact_fit_floors_rss() {
    let pts: Vec<(f64, f64)> = (0..8).map(|i| (f64::from(i), 0.05 + 0.1 * f64::from(i))).collect();
    let cmp = compare_models_aic(&pts).unwrap();
    let lin = cmp.score(CandidateModel::Linear).unwrap();
    assert!(lin.rss_floored);
    assert!(cmp.warnings.iter().any(|w| w.contains("floored")));
    assert_eq!(cmp.best, CandidateModel::Linear);
}

fn generated(model: CandidateModel, params: &[f64], loads: &[f64], sigma: f64, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = rng::seeded(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    loads.iter().map(|&n| (n, (model.eval(params, n).unwrap() + noise.sample(&mut rng)).clamp(0.0, 1.0))).collect()
}

#[test]
fn selects_generating_model_on_synthetic_data() {
    let loads: Vec<f64> = (1..=12).map(|i| 4.0 * f64::from(i)).collect();
    let cases: [(CandidateModel, &[f64]); 2] =
        [(CandidateModel::Bloom, &[10.0, 2.0]), (CandidateModel::Linear, &[0.05, 0.015])];
    for (model, params) in cases {
        let cmp = compare_models_aic(&generated(model, params, &loads, 0.01, 9)).unwrap();
        assert_eq!(cmp.best, model, "{cmp:#?}");
        assert!(!cmp.low_power());
    }
}

#[test]
fn fit_is_deterministic() {
    let a = compare_models_aic(&L1H11).unwrap();
    let b = compare_models_aic(&L1H11).unwrap();
    assert_eq!(a, b);
}

#[test]
fn curve_sorts_and_fits() {
    let pts = vec![
        CapacityPoint { n_unique: 50, fp_rate: 1.0 },
        CapacityPoint { n_unique: 5, fp_rate: 0.627 },
        CapacityPoint { n_unique: 20, fp_rate: 0.973 },
    ];
    let c = CapacityCurve::new(HeadId::new(1, 11), pts).unwrap().fit().unwrap();
    assert_eq!(c.points[0].n_unique, 5);
    assert!(c.fit.is_some());
    assert!(CapacityCurve::new(HeadId::new(0, 0), vec![CapacityPoint { n_unique: 1, fp_rate: 1.5 }]).is_err());
}
