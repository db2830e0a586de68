use serde::Serialize;

use super::{theoretical_positive_rate, DsBloomFilter, DsFilterConfig};
use crate::error::{invalid, Error, Result};
use crate::rng;

/// Positive rate treated as "no collisions" when locating a band's cutoff.
pub const DEFAULT_FLOOR: f64 = 0.01;

/// Named bandwidth presets, broadest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandPreset {
    /// Keeps a visible positive rate at cosine 0.5.
    Broad,
    Precise,
    /// At the floor by cosine 0.5.
    UltraPrecise,
}

impl BandPreset {
    pub const ALL: [BandPreset; 3] = [BandPreset::Broad, BandPreset::Precise, BandPreset::UltraPrecise];

    pub fn label(self) -> &'static str {
        match self {
            BandPreset::Broad => "broad",
            BandPreset::Precise => "precise",
            BandPreset::UltraPrecise => "ultra-precise",
        }
    }

    /// `(k_bits, tables)`.
    pub fn shape(self) -> (u32, u32) {
        match self {
            BandPreset::Broad => (4, 1),
            BandPreset::Precise => (10, 3),
            BandPreset::UltraPrecise => (16, 4),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolutionBand {
    pub label: String,
    pub k_bits: u32,
    pub tables: u32,
    /// Cosine below which the single-item positive rate stays under the floor.
    pub cutoff: f64,
}

impl ResolutionBand {
    pub fn new(label: impl Into<String>, k_bits: u32, tables: u32) -> Self {
        Self::with_floor(label, k_bits, tables, DEFAULT_FLOOR)
    }

    pub fn with_floor(label: impl Into<String>, k_bits: u32, tables: u32, floor: f64) -> Self {
        Self { label: label.into(), k_bits, tables, cutoff: cutoff_cosine(k_bits, tables, floor) }
    }

    pub fn preset(preset: BandPreset) -> Self {
        let (k, t) = preset.shape();
        Self::new(preset.label(), k, t)
    }

    pub fn config(&self, dimension: usize) -> DsFilterConfig {
        DsFilterConfig::new(dimension, self.k_bits, self.tables)
    }
}

/// Largest cosine in `[0, 1]` at which the theoretical rate is at most `floor`
/// (bisection; the rate is increasing in cosine).
fn cutoff_cosine(k_bits: u32, tables: u32, floor: f64) -> f64 {
    if k_bits == 0 || tables == 0 {
        return f64::NAN;
    }
    if theoretical_positive_rate(k_bits, tables, 0.0) > floor {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if theoretical_positive_rate(k_bits, tables, mid) <= floor {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BankVerdict {
    /// One verdict per band, broadest first.
    pub verdicts: Vec<bool>,
    /// Index of the tightest band that fired.
    pub tightest_fired: Option<usize>,
    /// AND across all bands.
    pub all_fired: bool,
}

/// Bands ordered from broadest to tightest (strictly increasing `k_bits`).
#[derive(Debug, Clone)]
pub struct FilterBank {
    dimension: usize,
    bands: Vec<(ResolutionBand, DsBloomFilter)>,
}

impl FilterBank {
    pub fn new(dimension: usize, bands: Vec<ResolutionBand>, seed: u64) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::EmptyInput("filter bank has no bands".into()));
        }
        if bands.windows(2).any(|w| w[0].k_bits >= w[1].k_bits) {
            return Err(invalid("bands must be ordered by strictly increasing k_bits"));
        }
        let bands = bands
            .into_iter()
            .enumerate()
            .map(|(i, band)| {
                let filter = DsBloomFilter::new(band.config(dimension), rng::derive_seed(seed, i as u64))?;
                Ok((band, filter))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dimension, bands })
    }

    pub fn presets(dimension: usize, seed: u64) -> Result<Self> {
        Self::new(dimension, BandPreset::ALL.iter().map(|&p| ResolutionBand::preset(p)).collect(), seed)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn bands(&self) -> impl Iterator<Item = &ResolutionBand> {
        self.bands.iter().map(|(b, _)| b)
    }

    pub fn insert(&mut self, v: &[f64]) -> Result<()> {
        self.bands.iter_mut().try_for_each(|(_, f)| f.insert(v))
    }

    pub fn query(&self, v: &[f64]) -> Result<BankVerdict> {
        let verdicts = self.bands.iter().map(|(_, f)| f.query(v).map(|q| q.positive)).collect::<Result<Vec<_>>>()?;
        Ok(BankVerdict {
            tightest_fired: verdicts.iter().rposition(|&b| b),
            all_fired: verdicts.iter().all(|&b| b),
            verdicts,
        })
    }
}

/// Per-band verdicts for `v`.
pub fn bank_query(bank: &FilterBank, v: &[f64]) -> Result<BankVerdict> {
    bank.query(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ds_filters::probe_at_cosine;
    use rand::RngCore;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(dim: usize, rng: &mut impl RngCore) -> Vec<f64> {
        (0..dim).map(|_| StandardNormal.sample(rng)).collect()
    }

    #[test]
    fn presets_are_ordered_and_bracket_half_cosine() {
        let bands: Vec<_> = BandPreset::ALL.iter().map(|&p| ResolutionBand::preset(p)).collect();
        assert!(bands.windows(2).all(|w| w[0].k_bits < w[1].k_bits));
        assert!(theoretical_positive_rate(4, 1, 0.5) > 0.1);
        assert!(theoretical_positive_rate(16, 4, 0.5) < DEFAULT_FLOOR);
        assert!(bands[0].cutoff < bands[1].cutoff && bands[1].cutoff < bands[2].cutoff);
        assert!(bands[2].cutoff > 0.5);
    }

    #[test]
    fn bank_rejects_empty_and_misordered() {
        assert!(FilterBank::new(8, vec![], 0).is_err());
        let bad = vec![ResolutionBand::new("a", 8, 1), ResolutionBand::new("b", 4, 1)];
        assert!(FilterBank::new(8, bad, 0).is_err());
    }

    #[test]
    fn stored_vector_fires_every_band() {
        let mut rng = rng::seeded(4);
        let mut bank = FilterBank::presets(32, 9).unwrap();
        let v = gaussian(32, &mut rng);
        bank.insert(&v).unwrap();
        let verdict = bank_query(&bank, &v).unwrap();
        assert_eq!(verdict.verdicts, vec![true, true, true]);
        assert_eq!(verdict.tightest_fired, Some(2));
        assert!(verdict.all_fired);
    }

    #[test]
    fn orthogonal_probe_misses_all_bands() {
        let mut rng = rng::seeded(8);
        let mut quiet = 0;
        for trial in 0..500 {
            let mut bank = FilterBank::presets(32, trial).unwrap();
            let v = gaussian(32, &mut rng);
            bank.insert(&v).unwrap();
            let probe = probe_at_cosine(&v, 0.0, &mut rng).unwrap();
            if bank.query(&probe).unwrap().verdicts.iter().all(|b| !b) {
                quiet += 1;
            }
        }
        // broad band alone fires with probability 1/16 at cosine 0
        assert!(quiet >= 430, "{quiet}");
    }

    #[test]
    fn broad_band_fires_more_than_tight_at_mid_similarity() {
        let mut rng = rng::seeded(12);
        let (mut broad, mut tight) = (0, 0);
        for trial in 0..2000 {
            let mut bank = FilterBank::presets(32, 10_000 + trial).unwrap();
            let v = gaussian(32, &mut rng);
            bank.insert(&v).unwrap();
            let probe = probe_at_cosine(&v, 0.7, &mut rng).unwrap();
            let verdict = bank.query(&probe).unwrap();
            broad += usize::from(verdict.verdicts[0]);
            tight += usize::from(verdict.verdicts[2]);
        }
        assert!(broad > tight, "broad={broad} tight={tight}");
    }
}
