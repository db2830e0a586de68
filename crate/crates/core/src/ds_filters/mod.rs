//! Distance-sensitive Bloom filters.
//!
//! Each table hashes a vector to the sign pattern of its projections onto
//! `k_bits` random unit hyperplanes. Two vectors at angle `θ` agree on a
//! single hyperplane with probability `1 - θ/π`, so a probe near a stored
//! vector collides far more often than a distant one. Tables are OR-combined
//! inside a filter; filters in a [`FilterBank`] are compared band by band and
//! AND-combined across the bank.

mod bank;
mod combine;
mod profile;

pub use bank::{bank_query, BandPreset, BankVerdict, FilterBank, ResolutionBand};
pub use combine::{and_combine_verdicts, AndCombination};
pub use profile::{fp_vs_distance_profile, probe_at_cosine, ProfilePoint};

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::filters::keyed_hash;
use crate::rng;

/// Largest `k_bits` for which the table is indexed directly by the sign
/// pattern; wider patterns are hashed into `bits_per_table`.
const DIRECT_INDEX_MAX_BITS: u32 = 20;

/// Per-hyperplane agreement probability for vectors at cosine `s`.
pub fn collision_probability(cosine: f64) -> f64 {
    1.0 - cosine.clamp(-1.0, 1.0).acos() / std::f64::consts::PI
}

/// Probability that a probe at cosine `s` to the only stored vector is
/// reported positive by a directly indexed filter.
pub fn theoretical_positive_rate(k_bits: u32, tables: u32, cosine: f64) -> f64 {
    let per_table = collision_probability(cosine).powi(k_bits as i32);
    1.0 - (1.0 - per_table).powi(tables as i32)
}

/// A set of random unit hyperplanes through the origin.
#[derive(Debug, Clone)]
pub struct Hyperplanes {
    dimension: usize,
    normals: Vec<f64>,
}

impl Hyperplanes {
    pub fn random(dimension: usize, count: usize, rng: &mut impl RngCore) -> Result<Self> {
        if dimension == 0 {
            return Err(invalid("dimension must be >= 1"));
        }
        let mut normals = Vec::with_capacity(dimension * count);
        for _ in 0..count {
            loop {
                let row: Vec<f64> = (0..dimension).map(|_| StandardNormal.sample(rng)).collect();
                let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    normals.extend(row.iter().map(|x| x / norm));
                    break;
                }
            }
        }
        Ok(Self { dimension, normals })
    }

    pub fn len(&self) -> usize {
        self.normals.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn normal(&self, i: usize) -> &[f64] {
        &self.normals[i * self.dimension..(i + 1) * self.dimension]
    }

    /// Sign bit per hyperplane (`true` for a strictly positive projection).
    pub fn signs<'a>(&'a self, v: &'a [f64]) -> impl Iterator<Item = bool> + 'a {
        self.normals.chunks_exact(self.dimension).map(move |n| n.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() > 0.0)
    }

    /// Fraction of hyperplanes on which `a` and `b` fall on the same side.
    pub fn agreement(&self, a: &[f64], b: &[f64]) -> f64 {
        let same = self.signs(a).zip(self.signs(b)).filter(|(x, y)| x == y).count();
        same as f64 / self.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DsFilterConfig {
    pub dimension: usize,
    pub k_bits: u32,
    pub tables: u32,
    /// Bits per table; `None` means `2^k_bits` (one bit per sign pattern).
    pub bits_per_table: Option<usize>,
}

impl DsFilterConfig {
    pub fn new(dimension: usize, k_bits: u32, tables: u32) -> Self {
        Self { dimension, k_bits, tables, bits_per_table: None }
    }

    fn validate(&self) -> Result<usize> {
        if self.dimension == 0 {
            return Err(invalid("dimension must be >= 1"));
        }
        if !(1..=64).contains(&self.k_bits) {
            return Err(invalid(format!("k_bits must be in 1..=64, got {}", self.k_bits)));
        }
        if self.tables == 0 {
            return Err(invalid("tables must be >= 1"));
        }
        let m = match self.bits_per_table {
            Some(0) => return Err(invalid("bits_per_table must be >= 1")),
            Some(m) => m,
            None if self.k_bits <= DIRECT_INDEX_MAX_BITS => 1usize << self.k_bits,
            None => return Err(invalid("k_bits above 20 needs an explicit bits_per_table")),
        };
        Ok(m)
    }
}

/// Outcome of a single probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DsQuery {
    pub positive: bool,
    pub matched_tables: u32,
}

#[derive(Debug, Clone)]
struct Table {
    planes: Hyperplanes,
    words: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct DsBloomFilter {
    config: DsFilterConfig,
    bits_per_table: usize,
    seed: u64,
    tables: Vec<Table>,
    len: u64,
}

impl DsBloomFilter {
    pub fn new(config: DsFilterConfig, seed: u64) -> Result<Self> {
        let bits_per_table = config.validate()?;
        let mut rng = rng::seeded(seed);
        let tables = (0..config.tables)
            .map(|_| {
                Ok(Table {
                    planes: Hyperplanes::random(config.dimension, config.k_bits as usize, &mut rng)?,
                    words: vec![0; bits_per_table.div_ceil(64)],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { config, bits_per_table, seed, tables, len: 0 })
    }

    pub fn config(&self) -> &DsFilterConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn hyperplanes(&self, table: usize) -> &Hyperplanes {
        &self.tables[table].planes
    }

    pub fn insert(&mut self, v: &[f64]) -> Result<()> {
        self.check(v)?;
        for t in 0..self.tables.len() {
            let slot = self.slot(t, v);
            self.tables[t].words[slot / 64] |= 1 << (slot % 64);
        }
        self.len += 1;
        Ok(())
    }

    pub fn query(&self, v: &[f64]) -> Result<DsQuery> {
        self.check(v)?;
        let matched = (0..self.tables.len())
            .filter(|&t| {
                let slot = self.slot(t, v);
                self.tables[t].words[slot / 64] & (1 << (slot % 64)) != 0
            })
            .count() as u32;
        Ok(DsQuery { positive: matched > 0, matched_tables: matched })
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.config.dimension {
            return Err(Error::DimensionMismatch { expected: self.config.dimension, got: v.len() });
        }
        if v.iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(())
    }

    fn slot(&self, table: usize, v: &[f64]) -> usize {
        let code = self.tables[table].planes.signs(v).enumerate().fold(0u64, |acc, (i, s)| acc | (u64::from(s) << i));
        if self.config.bits_per_table.is_none() {
            code as usize
        } else {
            (keyed_hash(self.seed ^ table as u64, &code.to_le_bytes()) % self.bits_per_table as u64) as usize
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_distr::Distribution;

    fn random_vec(dim: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng::seeded(seed);
        (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn exact_and_scaled_repeats_hit() {
        let mut f = DsBloomFilter::new(DsFilterConfig::new(16, 8, 2), 1).unwrap();
        let v = random_vec(16, 2);
        f.insert(&v).unwrap();
        assert_eq!(f.query(&v).unwrap(), DsQuery { positive: true, matched_tables: 2 });
        let doubled: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
        assert!(f.query(&doubled).unwrap().positive);
    }

    #[test]
    fn antipodal_probe_misses() {
        // every hyperplane separates v from -v, so the pattern is complemented
        for seed in 0..200 {
            let mut f = DsBloomFilter::new(DsFilterConfig::new(8, 8, 1), seed).unwrap();
            let v = random_vec(8, 1000 + seed);
            f.insert(&v).unwrap();
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            assert!(!f.query(&neg).unwrap().positive);
        }
    }

    #[test]
    fn empty_filter_is_negative() {
        let f = DsBloomFilter::new(DsFilterConfig::new(4, 3, 3), 0).unwrap();
        assert!(!f.query(&[1.0, 0.0, 0.0, 0.0]).unwrap().positive);
    }

    #[test]
    fn rejects_zero_and_mismatched_vectors() {
        let mut f = DsBloomFilter::new(DsFilterConfig::new(3, 4, 1), 0).unwrap();
        assert!(matches!(f.insert(&[0.0, 0.0, 0.0]), Err(Error::ZeroVector)));
        assert!(matches!(f.query(&[0.0; 3]), Err(Error::ZeroVector)));
        assert!(matches!(f.insert(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn config_validation() {
        assert!(DsBloomFilter::new(DsFilterConfig::new(0, 4, 1), 0).is_err());
        assert!(DsBloomFilter::new(DsFilterConfig::new(4, 0, 1), 0).is_err());
        assert!(DsBloomFilter::new(DsFilterConfig::new(4, 4, 0), 0).is_err());
        assert!(DsBloomFilter::new(DsFilterConfig::new(4, 30, 1), 0).is_err());
        let hashed = DsFilterConfig { bits_per_table: Some(100), ..DsFilterConfig::new(4, 30, 1) };
        let mut f = DsBloomFilter::new(hashed, 0).unwrap();
        f.insert(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(f.query(&[1.0, 2.0, 3.0, 4.0]).unwrap().positive);
    }

    #[test]
    fn hyperplanes_are_unit() {
        let mut rng = rng::seeded(3);
        let h = Hyperplanes::random(10, 50, &mut rng).unwrap();
        for i in 0..h.len() {
            let norm: f64 = h.normal(i).iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn theoretical_rates() {
        assert!((collision_probability(0.9) - 0.8564).abs() < 1e-3);
        assert!((theoretical_positive_rate(4, 1, 0.9) - 0.538).abs() < 1e-3);
        assert!((theoretical_positive_rate(10, 1, 0.0) - 0.5f64.powi(10)).abs() < 1e-12);
        assert_eq!(theoretical_positive_rate(7, 3, 1.0), 1.0);
    }

    proptest! {
        #[test]
        fn scale_invariant(
            v in proptest::collection::vec(-10.0f64..10.0, 6),
            probe in proptest::collection::vec(-10.0f64..10.0, 6),
            c in 0.001f64..1000.0,
            seed in any::<u64>(),
        ) {
            prop_assume!(v.iter().any(|&x| x != 0.0) && probe.iter().any(|&x| x != 0.0));
            let mut f = DsBloomFilter::new(DsFilterConfig::new(6, 5, 2), seed).unwrap();
            f.insert(&v).unwrap();
            prop_assert!(f.query(&v).unwrap().positive);
            let scaled: Vec<f64> = probe.iter().map(|x| c * x).collect();
            prop_assert_eq!(f.query(&probe).unwrap(), f.query(&scaled).unwrap());
        }
    }
}
