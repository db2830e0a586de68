//! Classical Bloom filter and its closed-form false-positive model.
//!
//! A filter of `m` bits with `k` hash functions holding `n` elements has an
//! expected false-positive rate of approximately `(1 - e^(-kn/m))^k`, which is
//! minimised at `k = (m/n) ln 2`.

use std::f64::consts::LN_2;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{self, splitmix64};

/// Bit count, hash count and load of a filter.
///
/// `k` is real-valued so fitted (non-integral) hash counts can be evaluated;
/// a concrete [`BloomFilter`] requires an integral `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    pub m: f64,
    pub k: f64,
    pub n: f64,
}

impl FilterParams {
    pub fn new(m: f64, k: f64, n: f64) -> Result<Self> {
        if !(m.is_finite() && m >= 1.0) {
            return Err(invalid(format!("m must be >= 1, got {m}")));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(invalid(format!("k must be > 0, got {k}")));
        }
        if !(n.is_finite() && n >= 0.0) {
            return Err(invalid(format!("n must be >= 0, got {n}")));
        }
        Ok(Self { m, k, n })
    }
}

/// `(1 - e^(-kn/m))^k`.
pub fn theoretical_fp(params: &FilterParams) -> Result<f64> {
    let FilterParams { m, k, n } = *params;
    if !(m >= 1.0) {
        return Err(invalid(format!("m must be >= 1, got {m}")));
    }
    if !(k > 0.0) || n < 0.0 {
        return Err(invalid(format!("need k > 0 and n >= 0, got k={k}, n={n}")));
    }
    Ok(bloom_fp_unchecked(m, k, n))
}

/// Closed form without validation; used inside the fitter where the optimiser
/// keeps `m, k > 0` by construction.
pub(crate) fn bloom_fp_unchecked(m: f64, k: f64, n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    let fill = -(-k * n / m).exp_m1();
    fill.powf(k).clamp(0.0, 1.0)
}

/// Hash count minimising the false-positive rate: `(m/n) ln 2`.
pub fn optimal_k(m: u64, n: u64) -> Result<f64> {
    if m == 0 {
        return Err(invalid("m must be >= 1"));
    }
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    Ok(m as f64 / n as f64 * LN_2)
}

/// Bloom filter over byte strings using double hashing
/// `h_i = g1 + i*g2 mod m` from a keyed 64-bit hash.
#[derive(Debug, Clone)]
pub struct BloomFilter {
    m: usize,
    k: u32,
    n: u64,
    seed: u64,
    words: Vec<u64>,
}

impl BloomFilter {
    pub fn new(m: usize, k: u32, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(invalid("m must be >= 1"));
        }
        if k == 0 {
            return Err(invalid("k must be >= 1"));
        }
        Ok(Self { m, k, n: 0, seed, words: vec![0; m.div_ceil(64)] })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of insert calls so far (re-inserts are counted).
    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> FilterParams {
        FilterParams { m: self.m as f64, k: f64::from(self.k), n: self.n as f64 }
    }

    pub fn count_set_bits(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn insert(&mut self, element: &[u8]) {
        for pos in self.positions(element) {
            self.words[pos / 64] |= 1 << (pos % 64);
        }
        self.n += 1;
    }

    pub fn contains(&self, element: &[u8]) -> bool {
        self.positions(element).all(|pos| self.words[pos / 64] & (1 << (pos % 64)) != 0)
    }

    /// Set every bit; afterwards every query is positive.
    pub fn saturate(&mut self) {
        for w in &mut self.words {
            *w = u64::MAX;
        }
        let tail = self.m % 64;
        if tail != 0 {
            if let Some(last) = self.words.last_mut() {
                *last = (1u64 << tail) - 1;
            }
        }
    }

    fn positions(&self, element: &[u8]) -> impl Iterator<Item = usize> {
        let m = self.m as u64;
        let k = u64::from(self.k);
        let g1 = keyed_hash(self.seed, element) % m;
        let g2 = keyed_hash(self.seed ^ 0xA076_1D64_78BD_642F, element) % m;
        (0..k).map(move |i| ((g1 + i * g2) % m) as usize)
    }
}

/// Keyed 64-bit hash over bytes (multiply-xorshift mixing of 8-byte lanes).
pub fn keyed_hash(key: u64, bytes: &[u8]) -> u64 {
    const P: u64 = 0x9FB2_1C65_1E98_DF25;
    let mut h = splitmix64(key ^ (bytes.len() as u64).wrapping_mul(P));
    let mut chunks = bytes.chunks_exact(8);
    for chunk in &mut chunks {
        let lane = u64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        h = splitmix64(h ^ lane.wrapping_mul(P)).rotate_left(29);
    }
    let rest = chunks.remainder();
    if !rest.is_empty() {
        let mut buf = [0u8; 8];
        buf[..rest.len()].copy_from_slice(rest);
        h = splitmix64(h ^ u64::from_le_bytes(buf).wrapping_mul(P) ^ 0xFF);
    }
    splitmix64(h)
}

/// Monte Carlo estimate of a false-positive rate with its binomial standard
/// error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FpEstimate {
    pub rate: f64,
    pub std_error: f64,
    pub positives: u64,
    pub trials: u64,
}

impl FpEstimate {
    pub fn from_counts(positives: u64, trials: u64) -> Self {
        let rate = positives as f64 / trials as f64;
        Self { rate, std_error: (rate * (1.0 - rate) / trials as f64).sqrt(), positives, trials }
    }
}

/// Empirical false-positive rate of an `m`-bit, `k`-hash filter at load `n`.
///
/// Each trial draws a fresh hash key, inserts `n` random elements and asks one
/// element that was never inserted, so trials are independent and the
/// binomial standard error is exact.
pub fn empirical_fp_rate(m: usize, k: u32, n: u64, trials: u64, seed: u64) -> Result<FpEstimate> {
    if trials == 0 {
        return Err(invalid("trials must be >= 1"));
    }
    let mut filter = BloomFilter::new(m, k, 0)?;
    let mut rng = rng::seeded(seed);
    let mut positives = 0u64;
    for _ in 0..trials {
        filter.seed = rng.next_u64();
        filter.n = 0;
        filter.words.iter_mut().for_each(|w| *w = 0);
        for _ in 0..n {
            filter.insert(&member_key(rng.next_u64()));
        }
        if filter.contains(&probe_key(rng.next_u64())) {
            positives += 1;
        }
    }
    Ok(FpEstimate::from_counts(positives, trials))
}

// Members and probes live in disjoint key spaces, so a probe can never be an
// inserted element.
fn member_key(x: u64) -> [u8; 9] {
    let mut key = [0u8; 9];
    key[1..].copy_from_slice(&x.to_le_bytes());
    key
}

fn probe_key(x: u64) -> [u8; 9] {
    let mut key = member_key(x);
    key[0] = 1;
    key
}
