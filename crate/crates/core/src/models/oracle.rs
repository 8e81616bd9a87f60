use dashmap::DashMap;

use crate::error::{Error, Result};
use crate::numerics::clamp_probability;

/// Counting oracle over subsets of `0..ground_size()`: the total mass of
/// supersets of a given set. Samplers only talk to models through this.
pub trait CountingOracle: Sync {
    fn ground_size(&self) -> usize;

    /// Common size of every set in the support, if there is one.
    fn sample_size(&self) -> Option<usize>;

    /// `ln Σ_{S ⊇ given} μ(S)`; `-inf` for zero mass.
    fn log_count(&self, given: &[usize]) -> Result<f64>;

    /// `P[i ∈ S | given ⊆ S]` for every `i` (1 on `given`).
    fn marginals(&self, given: &[usize]) -> Result<Vec<f64>>;

    /// Whether `P[T ⊆ S] ≤ Π P[i ∈ S]` holds for every conditional.
    fn negatively_correlated(&self) -> bool {
        false
    }

    fn count(&self, given: &[usize]) -> Result<f64> {
        Ok(self.log_count(given)?.exp())
    }

    /// `P[extra ⊆ S | given ⊆ S]`.
    fn inclusion_probability(&self, given: &[usize], extra: &[usize]) -> Result<f64> {
        let base = self.log_count(given)?;
        if base == f64::NEG_INFINITY {
            return Err(Error::ZeroConditional);
        }
        let mut all: Vec<usize> = given.iter().chain(extra).copied().collect();
        all.sort_unstable();
        all.dedup();
        let joint = self.log_count(&all)?;
        if joint == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        clamp_probability((joint - base).exp())
    }
}

impl<O: CountingOracle + ?Sized> CountingOracle for &O {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn sample_size(&self) -> Option<usize> {
        (**self).sample_size()
    }
    fn log_count(&self, given: &[usize]) -> Result<f64> {
        (**self).log_count(given)
    }
    fn marginals(&self, given: &[usize]) -> Result<Vec<f64>> {
        (**self).marginals(given)
    }
    fn negatively_correlated(&self) -> bool {
        (**self).negatively_correlated()
    }
}

/// Caches counts and marginal vectors by sorted conditioning set. Repeated
/// sampling from one model revisits the same small sets constantly.
pub struct Memoized<O> {
    inner: O,
    counts: DashMap<Vec<usize>, f64>,
    marginals: DashMap<Vec<usize>, Vec<f64>>,
}

impl<O: CountingOracle> Memoized<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, counts: DashMap::new(), marginals: DashMap::new() }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut s = v.to_vec();
    s.sort_unstable();
    s
}

impl<O: CountingOracle> CountingOracle for Memoized<O> {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }

    fn sample_size(&self) -> Option<usize> {
        self.inner.sample_size()
    }

    fn log_count(&self, given: &[usize]) -> Result<f64> {
        let key = sorted(given);
        if let Some(v) = self.counts.get(&key) {
            return Ok(*v);
        }
        let v = self.inner.log_count(&key)?;
        self.counts.insert(key, v);
        Ok(v)
    }

    fn marginals(&self, given: &[usize]) -> Result<Vec<f64>> {
        let key = sorted(given);
        if let Some(v) = self.marginals.get(&key) {
            return Ok(v.clone());
        }
        let v = self.inner.marginals(&key)?;
        self.marginals.insert(key, v.clone());
        Ok(v)
    }

    fn negatively_correlated(&self) -> bool {
        self.inner.negatively_correlated()
    }
}
