//! Refitting data drawn from each candidate form should recover that form.
//!
//! Parameters are chosen so no form sits on another's boundary: linear with
//! zero intercept is power with exponent one, and no criterion can tell
//! those apart.

use bloomhead::model_fit::{compare_models_aic, CandidateModel};
use bloomhead::rng;
use rand_distr::{Distribution, Normal};

const TRIALS: u64 = 100;
const SIGMA: f64 = 0.02;
/// Dense at small loads, where the saturating forms differ most.
const LOADS: [f64; 12] = [0.0, 1.0, 3.0, 6.0, 10.0, 15.0, 20.0, 26.0, 33.0, 40.0, 48.0, 56.0];

fn generating_params(model: CandidateModel) -> Vec<f64> {
    match model {
        CandidateModel::Bloom => vec![10.0, 2.0],
        CandidateModel::Logistic => vec![25.0, 6.0],
        CandidateModel::Power => vec![0.12, 0.5],
        CandidateModel::Linear => vec![0.05, 0.015],
        CandidateModel::Dilution => vec![15.0],
    }
}

fn recovery_rate(model: CandidateModel) -> f64 {
    let params = generating_params(model);
    let loads = LOADS;
    let noise = Normal::new(0.0, SIGMA).unwrap();
    let hits = (0..TRIALS)
        .filter(|&t| {
            let mut rng = rng::substream(7, t);
            let pts: Vec<(f64, f64)> = loads
                .iter()
                .map(|&n| (n, (model.eval(&params, n).unwrap() + noise.sample(&mut rng)).clamp(0.0, 1.0)))
                .collect();
            compare_models_aic(&pts).unwrap().best == model
        })
        .count();
    hits as f64 / TRIALS as f64
}

#[test]
fn each_generating_model_is_selected() {
    let rates: Vec<(CandidateModel, f64)> = CandidateModel::ALL.iter().map(|&m| (m, recovery_rate(m))).collect();
    for (m, r) in &rates {
        eprintln!("{m}: {r:.2}");
    }
    for (m, r) in rates {
        assert!(r >= 0.9, "{m} selected in only {:.0}% of trials", r * 100.0);
    }
}
