//! Capacity-curve fitting.
//!
//! A capacity curve is the false-positive rate of a head (or filter) as a
//! function of the number of unique items stored. The Bloom form
//! `(1 - e^(-kn/m))^k` is fitted by multi-start least squares, and compared by
//! AIC/BIC against four simpler saturating or unbounded forms.

mod optimize;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::filters::bloom_fp_unchecked;
use crate::head_analysis::HeadId;
use optimize::{minimize, Options};

/// RSS floor applied before taking logs in AIC/BIC.
pub const RSS_FLOOR: f64 = 1e-12;

/// Point counts at or below this emit a low-power warning in comparisons.
pub const LOW_POWER_POINTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityPoint {
    pub n_unique: u32,
    pub fp_rate: f64,
}

/// `(n_unique, fp_rate)` series for one head plus its Bloom fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityCurve {
    pub head: HeadId,
    pub points: Vec<CapacityPoint>,
    pub fit: Option<BloomFit>,
    pub model: CandidateModel,
}

impl CapacityCurve {
    /// Sorts points by load and validates rates.
    pub fn new(head: HeadId, mut points: Vec<CapacityPoint>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !(0.0..=1.0).contains(&p.fp_rate)) {
            return Err(invalid(format!("fp rate {} outside [0,1] for {head}", p.fp_rate)));
        }
        points.sort_by_key(|p| p.n_unique);
        Ok(Self { head, points, fit: None, model: CandidateModel::Bloom })
    }

    pub fn xy(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (f64::from(p.n_unique), p.fp_rate)).collect()
    }

    /// Fit the Bloom form in place (curves with fewer than three points are
    /// left unfitted).
    pub fn fit(mut self) -> Result<Self> {
        if self.points.len() >= 3 {
            self.fit = Some(fit_bloom_curve(&self.xy())?);
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateModel {
    Bloom,
    Logistic,
    Power,
    Linear,
    Dilution,
}

impl CandidateModel {
    pub const ALL: [CandidateModel; 5] = [
        CandidateModel::Bloom,
        CandidateModel::Logistic,
        CandidateModel::Power,
        CandidateModel::Linear,
        CandidateModel::Dilution,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CandidateModel::Bloom => "bloom",
            CandidateModel::Logistic => "logistic",
            CandidateModel::Power => "power",
            CandidateModel::Linear => "linear",
            CandidateModel::Dilution => "dilution",
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            CandidateModel::Dilution => 1,
            _ => 2,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            CandidateModel::Bloom => &["m", "k"],
            CandidateModel::Dilution => &["a"],
            _ => &["a", "b"],
        }
    }

    /// Evaluate the form at load `n`, clipped to `[0, 1]`.
    ///
    /// * bloom: `(1 - e^(-kn/m))^k`, params `[m, k]`
    /// * logistic: `1 / (1 + e^(-(n - a)/b))`
    /// * power: `min(1, a n^b)`
    /// * linear: `a + b n`
    /// * dilution: `n / (n + a)`
    pub fn eval(self, params: &[f64], n: f64) -> Result<f64> {
        if params.len() != self.param_count() {
            return Err(invalid(format!(
                "{} takes {} parameters, got {}",
                self.label(),
                self.param_count(),
                params.len()
            )));
        }
        let ok = match self {
            CandidateModel::Bloom => params[0] > 0.0 && params[1] > 0.0,
            CandidateModel::Logistic => params[1] > 0.0,
            CandidateModel::Power => params[0] >= 0.0,
            CandidateModel::Linear => true,
            CandidateModel::Dilution => params[0] > 0.0,
        };
        if !ok || params.iter().any(|p| !p.is_finite()) {
            return Err(invalid(format!("invalid {} parameters {params:?}", self.label())));
        }
        Ok(self.eval_unchecked(params, n))
    }

    fn eval_unchecked(self, p: &[f64], n: f64) -> f64 {
        let v = match self {
            CandidateModel::Bloom => bloom_fp_unchecked(p[0], p[1], n),
            CandidateModel::Logistic => 1.0 / (1.0 + (-(n - p[0]) / p[1]).exp()),
            CandidateModel::Power => {
                if n <= 0.0 {
                    0.0
                } else {
                    p[0] * n.powf(p[1])
                }
            }
            CandidateModel::Linear => p[0] + p[1] * n,
            CandidateModel::Dilution => n / (n + p[0]),
        };
        if v.is_nan() {
            v
        } else {
            v.clamp(0.0, 1.0)
        }
    }

    /// Map unconstrained optimiser coordinates to model parameters.
    fn decode(self, z: &[f64]) -> Vec<f64> {
        match self {
            CandidateModel::Bloom => vec![z[0].clamp(-7.0, 14.0).exp(), z[1].clamp(-7.0, 4.0).exp()],
            CandidateModel::Logistic => vec![z[0], z[1].clamp(-12.0, 12.0).exp()],
            CandidateModel::Power => vec![z[0].clamp(-40.0, 10.0).exp(), z[1]],
            CandidateModel::Linear => vec![z[0], z[1]],
            CandidateModel::Dilution => vec![z[0].clamp(-12.0, 14.0).exp()],
        }
    }

    /// Multi-start grid in optimiser coordinates, scaled to the data.
    fn starts(self, xy: &[(f64, f64)]) -> Vec<Vec<f64>> {
        let n_max = xy.iter().map(|p| p.0).fold(1.0, f64::max);
        let n_min = xy.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).max(0.0);
        let span = (n_max - n_min).max(1.0);
        match self {
            CandidateModel::Bloom => {
                let ms = [1.0, 3.16, 10.0, 31.6, 100.0, 316.0, 1000.0];
                let ks = [0.1, 0.3, 1.0, 3.0, 8.0];
                ms.iter().flat_map(|m| ks.iter().map(move |k| vec![f64::ln(*m), f64::ln(*k)])).collect()
            }
            CandidateModel::Logistic => {
                let centres = [0.0, 0.25, 0.5, 0.75, 1.0];
                let scales = [0.01, 0.05, 0.2, 0.6];
                centres
                    .iter()
                    .flat_map(|c| scales.iter().map(move |s| vec![n_min + c * span, (s * span).ln()]))
                    .collect()
            }
            CandidateModel::Power => {
                let exps = [-0.5, 0.2, 0.5, 1.0, 2.0];
                let targets = [0.1, 0.5, 0.9];
                exps.iter().flat_map(|b| targets.iter().map(move |t| vec![(t / n_max.powf(*b)).ln(), *b])).collect()
            }
            CandidateModel::Linear => {
                let (a, b) = ols(xy);
                vec![vec![a, b], vec![0.0, 1.0 / span], vec![0.5, 0.0], vec![0.0, 0.0]]
            }
            CandidateModel::Dilution => [0.1, 1.0, 10.0, 100.0, 1000.0].iter().map(|a: &f64| vec![a.ln()]).collect(),
        }
    }
}

impl fmt::Display for CandidateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CandidateModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CandidateModel::ALL.into_iter().find(|m| m.label() == s).ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// Evaluate a candidate form by label.
pub fn eval_candidate_model(label: &str, params: &[f64], n: f64) -> Result<f64> {
    label.parse::<CandidateModel>()?.eval(params, n)
}

fn ols(xy: &[(f64, f64)]) -> (f64, f64) {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

fn rss(model: CandidateModel, params: &[f64], xy: &[(f64, f64)]) -> f64 {
    xy.iter().map(|&(n, y)| (y - model.eval_unchecked(params, n)).powi(2)).sum()
}

fn tss(xy: &[(f64, f64)]) -> f64 {
    let my = xy.iter().map(|p| p.1).sum::<f64>() / xy.len() as f64;
    xy.iter().map(|p| (p.1 - my).powi(2)).sum()
}

fn validate_points(xy: &[(f64, f64)], min: usize) -> Result<()> {
    if xy.len() < min {
        return Err(invalid(format!("need at least {min} points, got {}", xy.len())));
    }
    if let Some(p) = xy.iter().find(|p| !(0.0..=1.0).contains(&p.1) || !p.0.is_finite() || p.0 < 0.0) {
        return Err(invalid(format!("invalid point ({}, {})", p.0, p.1)));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct Fitted {
    params: Vec<f64>,
    rss: f64,
}

/// Least squares for one candidate: the best of all starts, ties going to the
/// earliest start.
fn fit_model(model: CandidateModel, xy: &[(f64, f64)]) -> Fitted {
    let objective = |z: &[f64]| rss(model, &model.decode(z), xy);
    let opts = Options::default();
    let runs: Vec<(usize, Vec<f64>, f64)> = model
        .starts(xy)
        .into_par_iter()
        .enumerate()
        .map(|(i, z0)| {
            let m = minimize(&objective, &z0, &opts);
            (i, m.x, m.value)
        })
        .collect();
    let (_, z, _) =
        runs.into_iter().min_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0))).expect("at least one start");
    let params = model.decode(&z);
    Fitted { rss: rss(model, &params, xy), params }
}

/// Least-squares fit of a single candidate form. Returns the parameters
/// (in [`CandidateModel::param_names`] order) and the residual sum of squares.
pub fn fit_candidate(model: CandidateModel, points: &[(f64, f64)]) -> Result<(Vec<f64>, f64)> {
    validate_points(points, model.param_count() + 1)?;
    let f = fit_model(model, points);
    Ok((f.params, f.rss))
}

/// Result of fitting the Bloom form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BloomFit {
    pub m: f64,
    pub k: f64,
    pub rss: f64,
    /// `None` when the data are flat (zero total sum of squares).
    pub r_squared: Option<f64>,
    /// Flat curve: `m` and `k` are not identifiable from the data.
    pub non_identifiable: bool,
}

/// Fit `(1 - e^(-kn/m))^k` to `(n, fp)` points by multi-start Nelder-Mead in
/// log-parameter space.
pub fn fit_bloom_curve(points: &[(f64, f64)]) -> Result<BloomFit> {
    validate_points(points, 3)?;
    let fitted = fit_model(CandidateModel::Bloom, points);
    let total = tss(points);
    let flat = total <= 1e-15;
    Ok(BloomFit {
        m: fitted.params[0],
        k: fitted.params[1],
        rss: fitted.rss,
        r_squared: if flat { None } else { Some(1.0 - fitted.rss / total) },
        non_identifiable: flat,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelScore {
    pub model: CandidateModel,
    pub params: Vec<f64>,
    pub rss: f64,
    pub r_squared: Option<f64>,
    pub aic: f64,
    pub bic: f64,
    /// RSS was below [`RSS_FLOOR`] and was floored before taking logs.
    pub rss_floored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelComparison {
    /// Sorted by ascending AIC.
    pub scores: Vec<ModelScore>,
    pub best: CandidateModel,
    pub delta_aic: f64,
    pub points: usize,
    pub warnings: Vec<String>,
}

impl ModelComparison {
    pub fn score(&self, model: CandidateModel) -> Option<&ModelScore> {
        self.scores.iter().find(|s| s.model == model)
    }

    pub fn low_power(&self) -> bool {
        self.points <= LOW_POWER_POINTS
    }
}

/// Fit every candidate and rank by `AIC = 2p + n ln(RSS/n)`
/// (BIC: `p ln n + n ln(RSS/n)`).
pub fn compare_models_aic(points: &[(f64, f64)]) -> Result<ModelComparison> {
    validate_points(points, 4)?;
    let n = points.len() as f64;
    let total = tss(points);
    let mut scores: Vec<ModelScore> = CandidateModel::ALL
        .iter()
        .map(|&model| {
            let fitted = fit_model(model, points);
            let floored = fitted.rss < RSS_FLOOR;
            let r = fitted.rss.max(RSS_FLOOR);
            let p = model.param_count() as f64;
            ModelScore {
                model,
                r_squared: (total > 1e-15).then(|| 1.0 - fitted.rss / total),
                params: fitted.params,
                rss: fitted.rss,
                aic: 2.0 * p + n * (r / n).ln(),
                bic: p * n.ln() + n * (r / n).ln(),
                rss_floored: floored,
            }
        })
        .collect();
    scores.sort_by(|a, b| a.aic.total_cmp(&b.aic).then(a.model.cmp(&b.model)));

    let mut warnings = Vec::new();
    if points.len() <= LOW_POWER_POINTS {
        warnings.push(format!(
            "low statistical power: only {} points for a {}-model comparison",
            points.len(),
            scores.len()
        ));
    }
    let floored: Vec<&str> = scores.iter().filter(|s| s.rss_floored).map(|s| s.model.label()).collect();
    if !floored.is_empty() {
        warnings.push(format!("RSS floored at {RSS_FLOOR:e} for: {}", floored.join(", ")));
    }
    if total <= 1e-15 {
        warnings.push("flat curve: all fp values equal, models are not identifiable".into());
    }
    Ok(ModelComparison {
        best: scores[0].model,
        delta_aic: scores[1].aic - scores[0].aic,
        points: points.len(),
        scores,
        warnings,
    })
}

#[cfg(test)]
mod tests;
