use serde::Serialize;

use super::{mean, sample_variance};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectSize {
    pub d: f64,
    /// Pooled standard deviation was zero while the means differ; `d` is
    /// then `±inf`.
    pub infinite: bool,
}

/// Cohen's d with the pooled `n - 1` standard deviation.
pub fn cohens_d(x: &[f64], y: &[f64]) -> Result<EffectSize> {
    if x.len() < 2 || y.len() < 2 {
        return Err(invalid("cohen's d needs at least two values per group"));
    }
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let pooled = (((nx - 1.0) * sample_variance(x) + (ny - 1.0) * sample_variance(y)) / (nx + ny - 2.0)).sqrt();
    let diff = mean(x) - mean(y);
    if pooled == 0.0 {
        return Ok(if diff == 0.0 {
            EffectSize { d: 0.0, infinite: false }
        } else {
            EffectSize { d: diff.signum() * f64::INFINITY, infinite: true }
        });
    }
    Ok(EffectSize { d: diff / pooled, infinite: false })
}

/// Joint counts of two binary indicators `a` and `b`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TwoByTwo {
    pub n11: u64,
    pub n10: u64,
    pub n01: u64,
    pub n00: u64,
}

impl TwoByTwo {
    pub fn from_pairs(a: &[bool], b: &[bool]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(invalid("indicator sequences differ in length"));
        }
        let mut t = Self::default();
        for (&ai, &bi) in a.iter().zip(b) {
            match (ai, bi) {
                (true, true) => t.n11 += 1,
                (true, false) => t.n10 += 1,
                (false, true) => t.n01 += 1,
                (false, false) => t.n00 += 1,
            }
        }
        Ok(t)
    }

    pub fn total(&self) -> u64 {
        self.n11 + self.n10 + self.n01 + self.n00
    }
}

/// Phi coefficient; `None` when any marginal is zero.
pub fn phi_coefficient(t: &TwoByTwo) -> Option<f64> {
    let row1 = (t.n11 + t.n10) as f64;
    let row0 = (t.n01 + t.n00) as f64;
    let col1 = (t.n11 + t.n01) as f64;
    let col0 = (t.n10 + t.n00) as f64;
    let denom = row1 * row0 * col1 * col0;
    if denom == 0.0 {
        return None;
    }
    let num = t.n11 as f64 * t.n00 as f64 - t.n10 as f64 * t.n01 as f64;
    Some((num / denom.sqrt()).clamp(-1.0, 1.0))
}

pub fn bonferroni_threshold(alpha: f64, comparisons: usize) -> Result<f64> {
    if comparisons == 0 {
        return Err(Error::InvalidParameter("comparisons must be >= 1".into()));
    }
    Ok(alpha / comparisons as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cohens_d_examples() {
        assert_eq!(cohens_d(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap().d, 0.0);
        assert_abs_diff_eq!(cohens_d(&[2.0, 4.0], &[0.0, 2.0]).unwrap().d, 2f64.sqrt(), epsilon = 1e-12);
        let inf = cohens_d(&[1.0, 1.0], &[0.0, 0.0]).unwrap();
        assert!(inf.infinite && inf.d.is_infinite());
        assert!(cohens_d(&[1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn phi_examples() {
        let diag = TwoByTwo { n11: 5, n10: 0, n01: 0, n00: 5 };
        assert_eq!(phi_coefficient(&diag), Some(1.0));
        let flat = TwoByTwo { n11: 2, n10: 2, n01: 2, n00: 2 };
        assert_eq!(phi_coefficient(&flat), Some(0.0));
        let half = TwoByTwo { n11: 3, n10: 1, n01: 1, n00: 3 };
        assert_eq!(phi_coefficient(&half), Some(0.5));
        let degenerate = TwoByTwo { n11: 0, n10: 0, n01: 3, n00: 5 };
        assert_eq!(phi_coefficient(&degenerate), None);
    }

    #[test]
    fn phi_equals_pearson_of_indicators() {
        let mut state = 12345u64;
        for _ in 0..50 {
            let n = 200;
            let mut a = Vec::with_capacity(n);
            let mut b = Vec::with_capacity(n);
            for _ in 0..n {
                state = crate::rng::splitmix64(state);
                let ai = state.is_multiple_of(3);
                let bi = if state % 7 < 3 { ai } else { (state >> 20).is_multiple_of(2) };
                a.push(ai);
                b.push(bi);
            }
            let phi = phi_coefficient(&TwoByTwo::from_pairs(&a, &b).unwrap()).unwrap();
            let fa: Vec<f64> = a.iter().map(|&v| f64::from(u8::from(v))).collect();
            let fb: Vec<f64> = b.iter().map(|&v| f64::from(u8::from(v))).collect();
            let (ma, mb) = (mean(&fa), mean(&fb));
            let cov: f64 = fa.iter().zip(&fb).map(|(x, y)| (x - ma) * (y - mb)).sum();
            let va: f64 = fa.iter().map(|x| (x - ma).powi(2)).sum();
            let vb: f64 = fb.iter().map(|y| (y - mb).powi(2)).sum();
            assert_abs_diff_eq!(phi, cov / (va * vb).sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn bonferroni_examples() {
        assert_abs_diff_eq!(bonferroni_threshold(0.05, 144).unwrap(), 3.472e-4, epsilon = 1e-7);
        assert_eq!(bonferroni_threshold(0.05, 1).unwrap(), 0.05);
        assert_abs_diff_eq!(bonferroni_threshold(0.05, 384).unwrap(), 1.302e-4, epsilon = 1e-7);
        assert!(bonferroni_threshold(0.05, 0).is_err());
    }
}
