use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::DppModel;
use crate::numerics::det;
use crate::samplers::SampleResult;

/// Hard cap on ground-set size for exhaustive enumeration.
pub const MAX_BRUTE_FORCE_N: usize = 20;

/// Key under which failed sampler runs are counted in empirical histograms.
/// No genuine set contains `usize::MAX`.
pub const FAILURE_KEY: [usize; 1] = [usize::MAX];

/// A finite distribution over sets, stored as sorted index tuples.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExactDistribution {
    masses: BTreeMap<Vec<usize>, f64>,
}

impl ExactDistribution {
    /// Normalizes nonnegative weights; zero weights are dropped.
    pub fn from_weights(weights: impl IntoIterator<Item = (Vec<usize>, f64)>) -> Result<Self> {
        let mut masses = BTreeMap::new();
        for (mut s, w) in weights {
            if !(w >= 0.0) {
                return Err(Error::NegativeMass(w));
            }
            s.sort_unstable();
            if w > 0.0 {
                *masses.entry(s).or_insert(0.0) += w;
            }
        }
        let z: f64 = masses.values().sum();
        if !(z > 0.0) {
            return Err(Error::ZeroMass);
        }
        masses.values_mut().for_each(|w| *w /= z);
        Ok(Self { masses })
    }

    /// Empirical histogram of sampler outputs; `None` marks a failed run.
    pub fn empirical<'a>(samples: impl IntoIterator<Item = Option<&'a [usize]>>) -> Result<Self> {
        Self::from_weights(samples.into_iter().map(|s| (s.map_or(FAILURE_KEY.to_vec(), |s| s.to_vec()), 1.0)))
    }

    /// Histogram of sampler results; failed runs land on [`FAILURE_KEY`].
    pub fn from_results<'a>(results: impl IntoIterator<Item = &'a SampleResult>) -> Result<Self> {
        Self::empirical(results.into_iter().map(|r| (!r.status.is_failed()).then_some(r.sample.as_slice())))
    }

    pub fn probability(&self, s: &[usize]) -> f64 {
        let mut key = s.to_vec();
        key.sort_unstable();
        self.masses.get(&key).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.masses.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, f64)> {
        self.masses.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn failure_mass(&self) -> f64 {
        self.probability(&FAILURE_KEY)
    }

    /// Distribution of `f(S)` for `S` drawn from `self`.
    pub fn map<K: Ord>(&self, f: impl Fn(&[usize]) -> K) -> BTreeMap<K, f64> {
        let mut out = BTreeMap::new();
        for (s, p) in self.iter() {
            *out.entry(f(s)).or_insert(0.0) += p;
        }
        out
    }
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_BRUTE_FORCE_N {
        return Err(Error::GroundSetTooLarge { n, cap: MAX_BRUTE_FORCE_N });
    }
    Ok(())
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..(1u32 << n)).map(move |mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
}

/// Exact law of a model by enumerating every subset.
pub fn brute_force_distribution(model: &DppModel) -> Result<ExactDistribution> {
    let n = model.ground_size();
    check_size(n)?;
    let k = model.sample_size();
    let weights: Vec<(Vec<usize>, f64)> = subsets(n)
        .filter(|s| k.is_none_or(|k| s.len() == k))
        .map(|s| model.mass(&s).map(|w| (s, w)))
        .collect::<Result<_>>()?;
    ExactDistribution::from_weights(weights)
}

/// Exact law of the DPP with marginal kernel `K`: `P[Y = S] = |det(K - I_{S̄})|`.
pub fn kernel_distribution(k: &DMatrix<f64>) -> Result<ExactDistribution> {
    let n = k.nrows();
    check_size(n)?;
    let weights = subsets(n).map(|s| {
        let mut m = k.clone();
        for i in 0..n {
            if !s.contains(&i) {
                m[(i, i)] -= 1.0;
            }
        }
        let p = det(&m).abs();
        (s, p)
    });
    ExactDistribution::from_weights(weights.collect::<Vec<_>>())
}

/// Keep each element of a draw independently with probability `alpha`.
pub fn thinned_distribution(d: &ExactDistribution, alpha: f64) -> Result<ExactDistribution> {
    let mut weights = Vec::new();
    for (s, p) in d.iter() {
        let m = s.len();
        for mask in 0u32..(1u32 << m) {
            let kept: Vec<usize> = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| s[b]).collect();
            let w = alpha.powi(kept.len() as i32) * (1.0 - alpha).powi((m - kept.len()) as i32);
            weights.push((kept, p * w));
        }
    }
    ExactDistribution::from_weights(weights)
}

/// `μ D_{k→ℓ}`: a uniformly random `ℓ`-subset of a draw from `d`.
pub fn downsample_distribution(d: &ExactDistribution, ell: usize) -> Result<ExactDistribution> {
    let mut sizes = d.support().map(Vec::len);
    let k = sizes.next().ok_or(Error::ZeroMass)?;
    if sizes.any(|s| s != k) {
        return Err(Error::MixedSizes);
    }
    if ell > k {
        return Err(Error::InvalidArgument(format!("ℓ = {ell} exceeds k = {k}")));
    }
    let per = 1.0 / binomial(k, ell);
    let mut weights = Vec::new();
    for (s, p) in d.iter() {
        for_each_combination(k, ell, |idx| weights.push((idx.iter().map(|&i| s[i]).collect(), p * per)));
    }
    ExactDistribution::from_weights(weights)
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k.min(n - k)).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Calls `f` on every increasing `k`-tuple of `0..n`.
pub fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(pos) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `(1/2) Σ |a_S - b_S|` over the union of supports.
pub fn tv_distance(a: &ExactDistribution, b: &ExactDistribution) -> f64 {
    let mut total = 0.0;
    for (s, p) in a.iter() {
        total += (p - b.masses.get(s).copied().unwrap_or(0.0)).abs();
    }
    for (s, q) in b.iter() {
        if !a.masses.contains_key(s) {
            total += q;
        }
    }
    (0.5 * total).min(1.0)
}

/// Monte-Carlo allowance `3·√(|support| / (2N))` for an `N`-sample TV test.
pub fn statistical_tolerance(support: usize, samples: usize) -> f64 {
    3.0 * (support as f64 / (2.0 * samples as f64)).sqrt()
}
