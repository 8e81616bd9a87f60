use serde::{Deserialize, Serialize};

use super::distribution::{for_each_combination, ExactDistribution};
use crate::error::{Error, Result};
use crate::models::CountingOracle;

/// Uniform measure on unions of `k/2` of the pairs `{2i, 2i+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HardInstance {
    n_pairs: usize,
    k: usize,
}

/// Result of conditioning a [`HardInstance`] on a set.
#[derive(Clone, Debug)]
pub struct HardConditioned {
    pub chosen: Vec<usize>,
    /// Partners of chosen elements, included with probability one.
    pub forced: Vec<usize>,
    /// Measure over the untouched pairs.
    pub residual: HardInstance,
    /// `index_map[r]` is the original index of residual element `r`.
    pub index_map: Vec<usize>,
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    (0..k.min(n - k)).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

impl HardInstance {
    pub fn new(n_pairs: usize, k: usize) -> Result<Self> {
        if !k.is_multiple_of(2) {
            return Err(Error::BadParity(format!("k = {k} must be even")));
        }
        if k > 2 * n_pairs {
            return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {}", 2 * n_pairs)));
        }
        Ok(Self { n_pairs, k })
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn touched_pairs(&self, t: &[usize]) -> Result<Vec<usize>> {
        let mut pairs: Vec<usize> = t.iter().map(|&e| e / 2).collect();
        if let Some(&e) = t.iter().find(|&&e| e >= 2 * self.n_pairs) {
            return Err(Error::InvalidArgument(format!("element {e} outside ground set")));
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(pairs)
    }

    pub fn condition(&self, t: &[usize]) -> Result<HardConditioned> {
        let pairs = self.touched_pairs(t)?;
        if pairs.len() > self.k / 2 {
            return Err(Error::ZeroMassCondition);
        }
        let forced = pairs.iter().flat_map(|&p| [2 * p, 2 * p + 1]).filter(|e| !t.contains(e)).collect();
        let index_map: Vec<usize> =
            (0..2 * self.n_pairs).filter(|e| pairs.binary_search(&(e / 2)).is_err()).collect();
        let residual = HardInstance::new(self.n_pairs - pairs.len(), self.k - 2 * pairs.len())?;
        Ok(HardConditioned { chosen: t.to_vec(), forced, residual, index_map })
    }

    pub fn distribution(&self) -> Result<ExactDistribution> {
        let mut weights = Vec::new();
        for_each_combination(self.n_pairs, self.k / 2, |pairs| {
            weights.push((pairs.iter().flat_map(|&p| [2 * p, 2 * p + 1]).collect(), 1.0));
        });
        ExactDistribution::from_weights(weights)
    }
}

impl CountingOracle for HardInstance {
    fn ground_size(&self) -> usize {
        2 * self.n_pairs
    }

    fn sample_size(&self) -> Option<usize> {
        Some(self.k)
    }

    fn log_count(&self, given: &[usize]) -> Result<f64> {
        let m = self.touched_pairs(given)?.len();
        if m > self.k / 2 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(ln_binomial(self.n_pairs - m, self.k / 2 - m))
    }

    fn marginals(&self, given: &[usize]) -> Result<Vec<f64>> {
        let pairs = self.touched_pairs(given)?;
        let m = pairs.len();
        if m > self.k / 2 {
            return Err(Error::ZeroConditional);
        }
        let free = if self.n_pairs == m { 0.0 } else { (self.k / 2 - m) as f64 / (self.n_pairs - m) as f64 };
        Ok((0..2 * self.n_pairs).map(|e| if pairs.binary_search(&(e / 2)).is_ok() { 1.0 } else { free }).collect())
    }
}

/// Number of `ℓ`-subsets of a `k`-set of `k/2` pairs containing exactly `t`
/// whole pairs: `C(k/2,t)·C(k/2-t, ℓ-2t)·2^{ℓ-2t}`.
pub fn duplicate_subset_count(k: usize, ell: usize, t: usize) -> u128 {
    if t > k / 2 || 2 * t > ell {
        return 0;
    }
    let singles = ell - 2 * t;
    binomial_u128(k / 2, t) * binomial_u128(k / 2 - t, singles) * (1u128 << singles)
}

pub fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `P[a draw from μ_ℓ contains exactly t pairs]`.
pub fn duplicate_probability(k: usize, ell: usize, t: usize) -> f64 {
    duplicate_subset_count(k, ell, t) as f64 / binomial_u128(k, ell) as f64
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DuplicateRow {
    pub ell: usize,
    pub t: usize,
    pub probability: f64,
    /// `(ℓ²/k)^t`.
    pub reference: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DuplicateRatio {
    pub ell: usize,
    pub t: usize,
    /// `P[t pairs at 2ℓ] / P[t pairs at ℓ]`.
    pub ratio: f64,
    /// `4^t`.
    pub target: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DuplicateScalingReport {
    pub n_pairs: usize,
    pub k: usize,
    pub rows: Vec<DuplicateRow>,
    pub ratios: Vec<DuplicateRatio>,
}

pub fn duplicate_scaling_report(n_pairs: usize, k: usize, ells: &[usize]) -> Result<DuplicateScalingReport> {
    HardInstance::new(n_pairs, k)?;
    if let Some(&ell) = ells.iter().find(|&&l| l > k) {
        return Err(Error::InvalidArgument(format!("ℓ = {ell} exceeds k = {k}")));
    }
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    for &ell in ells {
        for t in 0..=ell / 2 {
            rows.push(DuplicateRow {
                ell,
                t,
                probability: duplicate_probability(k, ell, t),
                reference: ((ell * ell) as f64 / k as f64).powi(t as i32),
            });
            if 2 * ell <= k {
                let base = duplicate_probability(k, ell, t);
                if base > 0.0 {
                    ratios.push(DuplicateRatio {
                        ell,
                        t,
                        ratio: duplicate_probability(k, 2 * ell, t) / base,
                        target: 4f64.powi(t as i32),
                    });
                }
            }
        }
    }
    Ok(DuplicateScalingReport { n_pairs, k, rows, ratios })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_instance() {
        let h = HardInstance::new(2, 2).unwrap();
        let d = h.distribution().unwrap();
        assert_eq!(d.support().cloned().collect::<Vec<_>>(), vec![vec![0, 1], vec![2, 3]]);
        assert!(h.marginals(&[]).unwrap().iter().all(|&p| (p - 0.5).abs() < 1e-15));
        assert!(matches!(HardInstance::new(3, 3), Err(Error::BadParity(_))));
    }

    #[test]
    fn counting() {
        let h = HardInstance::new(5, 4).unwrap();
        assert!((h.count(&[]).unwrap() - 10.0).abs() < 1e-9);
        assert!((h.count(&[0]).unwrap() - 4.0).abs() < 1e-9);
        assert!((h.count(&[0, 1]).unwrap() - 4.0).abs() < 1e-9);
        assert!((h.count(&[0, 2]).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(h.count(&[0, 2, 4]).unwrap(), 0.0);
        let c = h.condition(&[3]).unwrap();
        assert_eq!(c.forced, vec![2]);
        assert_eq!(c.residual, HardInstance::new(4, 2).unwrap());
    }

    #[test]
    fn whole_set_is_all_pairs() {
        assert_eq!(duplicate_probability(10, 10, 5), 1.0);
        assert!(duplicate_probability(100, 2, 0) > 0.98);
    }
}
