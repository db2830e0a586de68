use anyhow::Context;
use bloomhead::ds_filters::{fp_vs_distance_profile, theoretical_positive_rate, BandPreset, ResolutionBand};
use bloomhead::filters::{empirical_fp_rate, theoretical_fp, FilterParams};
use bloomhead::rng::derive_seed;

use crate::report::{num, Report, Table};
use crate::{Common, Failure, SimulateArgs};

const BLOOM_PROBES: u64 = 10_000;
const DSBF_PROBES: u64 = 1_000;
const LEVELS: [f64; 11] = [1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.0];

/// Classical filters emit the capacity `cells` schema; distance-sensitive
/// bands emit the resolution `levels` schema, so either overlays head curves.
pub fn simulate_filter(c: &Common, a: &SimulateArgs) -> Result<Report, Failure> {
    if a.dsbf {
        return dsbf(c, a);
    }
    let (Some(m), Some(k)) = (a.m, a.k) else {
        return Err(Failure::Usage("simulate-filter needs --m and --k, or --dsbf".into()));
    };
    if a.loads.is_empty() {
        return Err(Failure::Usage("--loads is empty".into()));
    }
    let probes = a.probes.unwrap_or(BLOOM_PROBES);
    let label = format!("bloom(m={m},k={k})");
    let mut report = Report::new("simulate-filter");
    let mut cells = Table::new("cells", &["head", "n_unique", "fired", "probes", "fp_rate"]);
    let mut theory = Table::new("theory", &["head", "n_unique", "theoretical", "std_error", "z"]);
    for &n in &a.loads {
        let est = empirical_fp_rate(m, k, n, probes, derive_seed(c.seed, n))?;
        let fp = theoretical_fp(&FilterParams::new(m as f64, f64::from(k), n as f64)?)?;
        cells.push(vec![label.clone(), n.to_string(), est.positives.to_string(), probes.to_string(), num(est.rate)]);
        // SE from the theoretical rate so saturated cells do not divide by zero
        let se = (fp * (1.0 - fp) / probes as f64).sqrt();
        let z = if se > 0.0 { (est.rate - fp) / se } else { 0.0 };
        theory.push(vec![label.clone(), n.to_string(), num(fp), num(se), num(z)]);
        if z.abs() > 4.0 {
            report.warn(format!("{label} at n={n}: empirical {} is {z:.1} SE from theory {}", num(est.rate), num(fp)));
        }
    }
    report.tables.push(cells);
    report.tables.push(theory);
    Ok(report)
}

fn dsbf(c: &Common, a: &SimulateArgs) -> Result<Report, Failure> {
    let probes = a.probes.unwrap_or(DSBF_PROBES) as usize;
    let mut report = Report::new("simulate-filter");
    let mut levels =
        Table::new("levels", &["head", "level", "probes", "mean_attention", "normalized", "fired", "fp_rate"]);
    let mut theory = Table::new("theory", &["head", "level", "theoretical", "mean_agreement", "std_error"]);
    for (i, preset) in BandPreset::ALL.into_iter().enumerate() {
        let band = ResolutionBand::preset(preset);
        let config = band.config(a.dimension);
        let points = fp_vs_distance_profile(config, a.stored, &LEVELS, probes, derive_seed(c.seed, i as u64))
            .with_context(|| format!("simulating band {}", band.label))?;
        let label = format!("dsbf:{}(k={},t={})", band.label, band.k_bits, band.tables);
        for p in &points {
            levels.push(vec![
                label.clone(),
                format!("{:.1}", p.cosine),
                p.probes.to_string(),
                String::new(),
                String::new(),
                ((p.fp_rate * p.probes as f64).round() as u64).to_string(),
                num(p.fp_rate),
            ]);
            let single = theoretical_positive_rate(band.k_bits, band.tables, p.cosine);
            theory.push(vec![
                label.clone(),
                format!("{:.1}", p.cosine),
                num(single),
                num(p.mean_agreement),
                num(p.std_error),
            ]);
        }
        for w in points.windows(2) {
            let slack = 3.0 * (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
            if w[1].fp_rate > w[0].fp_rate + slack {
                report.warn(format!("{label}: FP rate rises from cosine {:.1} to {:.1}", w[0].cosine, w[1].cosine));
            }
        }
    }
    report.tables.push(levels);
    report.tables.push(theory);
    Ok(report)
}
