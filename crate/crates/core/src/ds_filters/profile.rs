use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::{DsBloomFilter, DsFilterConfig};
use crate::error::{invalid, Error, Result};
use crate::rng;

/// A unit vector at exactly cosine `s` to `target`:
/// `u = s·t̂ + sqrt(1 - s²)·ŵ` with `ŵ` a random direction orthogonal to `t̂`.
pub fn probe_at_cosine(target: &[f64], cosine: f64, rng: &mut impl RngCore) -> Result<Vec<f64>> {
    if !(-1.0..=1.0).contains(&cosine) {
        return Err(invalid(format!("cosine must be in [-1,1], got {cosine}")));
    }
    let norm = target.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let t: Vec<f64> = target.iter().map(|x| x / norm).collect();
    if target.len() == 1 || cosine.abs() == 1.0 {
        return Ok(t.iter().map(|x| x * cosine.signum()).collect());
    }
    let w = loop {
        let mut w: Vec<f64> = (0..t.len()).map(|_| StandardNormal.sample(rng)).collect();
        let along: f64 = w.iter().zip(&t).map(|(a, b)| a * b).sum();
        w.iter_mut().zip(&t).for_each(|(a, b)| *a -= along * b);
        let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if wn > 1e-9 {
            w.iter_mut().for_each(|a| *a /= wn);
            break w;
        }
    };
    let sine = (1.0 - cosine * cosine).sqrt();
    Ok(t.iter().zip(&w).map(|(a, b)| cosine * a + sine * b).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub cosine: f64,
    pub fp_rate: f64,
    pub std_error: f64,
    /// Mean fraction of hyperplanes on which probe and target agree.
    pub mean_agreement: f64,
    pub probes: usize,
}

/// Empirical positive rate of probes at each cosine level.
///
/// Every probe uses a freshly seeded filter holding `stored` random vectors;
/// the probe is built at the requested cosine to the first of them. Probe
/// `i` at level `j` draws from its own substream, so the result is identical
/// however the work is scheduled.
pub fn fp_vs_distance_profile(
    config: DsFilterConfig,
    stored: usize,
    levels: &[f64],
    probes: usize,
    seed: u64,
) -> Result<Vec<ProfilePoint>> {
    if probes == 0 {
        return Err(invalid("probes per level must be >= 1"));
    }
    if stored == 0 {
        return Err(invalid("at least one stored vector is required"));
    }
    if let Some(&bad) = levels.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(invalid(format!("similarity level {bad} outside [0,1]")));
    }
    if levels.windows(2).any(|w| w[0] < w[1]) {
        return Err(invalid("similarity levels must be sorted descending"));
    }
    levels
        .iter()
        .enumerate()
        .map(|(li, &level)| {
            let outcomes = (0..probes)
                .into_par_iter()
                .map(|pi| one_probe(config, stored, level, seed, ((li as u64) << 32) | pi as u64))
                .collect::<Result<Vec<(bool, f64)>>>()?;
            let hits = outcomes.iter().filter(|(hit, _)| *hit).count();
            let rate = hits as f64 / probes as f64;
            Ok(ProfilePoint {
                cosine: level,
                fp_rate: rate,
                std_error: (rate * (1.0 - rate) / probes as f64).sqrt(),
                mean_agreement: outcomes.iter().map(|(_, a)| a).sum::<f64>() / probes as f64,
                probes,
            })
        })
        .collect()
}

fn one_probe(config: DsFilterConfig, stored: usize, level: f64, seed: u64, stream: u64) -> Result<(bool, f64)> {
    let mut rng = rng::substream(seed, stream);
    let mut filter = DsBloomFilter::new(config, rng.next_u64())?;
    let mut target = Vec::new();
    for i in 0..stored {
        let v: Vec<f64> = (0..config.dimension).map(|_| StandardNormal.sample(&mut rng)).collect();
        filter.insert(&v)?;
        if i == 0 {
            target = v;
        }
    }
    let probe = probe_at_cosine(&target, level, &mut rng)?;
    let agreement = (0..filter.tables.len()).map(|t| filter.hyperplanes(t).agreement(&target, &probe)).sum::<f64>()
        / filter.tables.len() as f64;
    Ok((filter.query(&probe)?.positive, agreement))
}
