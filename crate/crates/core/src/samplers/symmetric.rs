//! Batched rejection sampler for negatively correlated measures.
//!
//! A batch proposes an ordered `t`-tuple of i.i.d. draws from the marginals
//! `p_i / k` and accepts it with probability `P[T ⊆ S] / (C · Π p_i)`,
//! `C = exp(t²/k)`. Negative correlation keeps this at most `1/C`, and the
//! accepted set is distributed exactly as a uniform `t`-subset of a sample.

use rand::distr::weighted::WeightedIndex;

use super::batched::{batched_sample, symmetric_batch_size};
use super::fanout::{self, Plan, RatioTarget};
use super::{draw, free_elements, sorted, weighted_index, RoundMeter, SampleResult, SamplerConfig, Status};
use crate::error::{Error, Result};
use crate::models::CountingOracle;
use crate::rng::{tag, StreamRng};

/// `ln (k)_t = ln k(k-1)...(k-t+1)`.
fn ln_falling(k: usize, t: usize) -> f64 {
    (0..t).map(|i| ((k - i) as f64).ln()).sum()
}

/// One batch of the symmetric sampler, conditioned on `given`.
pub struct SymmetricBatch<'a, O: ?Sized> {
    oracle: &'a O,
    given: Vec<usize>,
    free: Vec<usize>,
    /// Marginal of `free[j]`.
    p: Vec<f64>,
    dist: WeightedIndex<f64>,
    t: usize,
    k: usize,
    plan: Plan,
}

impl<'a, O: CountingOracle + ?Sized> SymmetricBatch<'a, O> {
    /// `delta` is the failure budget of this round.
    pub fn new(oracle: &'a O, given: &[usize], t: usize, delta: f64) -> Result<Self> {
        if !oracle.negatively_correlated() {
            return Err(Error::InvalidModel("batched symmetric sampling needs a negatively correlated model".into()));
        }
        let k_total = oracle
            .sample_size()
            .ok_or_else(|| Error::InvalidModel("batched symmetric sampling needs a cardinality constraint".into()))?;
        let given = sorted(given.to_vec());
        let k = k_total.checked_sub(given.len()).ok_or(Error::ZeroConditional)?;
        if t == 0 || t > k {
            return Err(Error::InvalidArgument(format!("batch size {t} must lie in 1..={k}")));
        }
        let marginals = oracle.marginals(&given)?;
        let free = free_elements(oracle.ground_size(), &given);
        let p: Vec<f64> = free.iter().map(|&i| marginals[i]).collect();
        let dist = weighted_index(&p)?;
        let log_c = (t * t) as f64 / k as f64;
        let plan = Plan {
            log_bound: log_c + t as f64 * (k as f64).ln() - ln_falling(k, t),
            attempts: (1.0 / delta).ln().max(1.0),
            strict: true,
        };
        Ok(Self { oracle, given, free, p, dist, t, k, plan })
    }

    /// Number of trials the round launches.
    pub fn width(&self) -> f64 {
        self.plan.width()
    }

    /// Acceptance probability of an ordered proposal of original indices.
    pub fn acceptance_probability(&self, tuple: &[usize]) -> Result<f64> {
        Ok(self.log_ratio(&tuple.to_vec())?.map_or(0.0, |lr| (lr - self.plan.log_bound).exp()))
    }

    /// A single trial with its own stream; `Some` when accepted.
    pub fn trial(&self, seed: u64, index: u64) -> Result<Option<Vec<usize>>> {
        fanout::trial(self, &self.plan, seed, &[tag::ROUND], index)
    }

    /// One fan-out round. `None` when every trial was rejected.
    pub fn run(&self, config: &SamplerConfig, key: &[u64], meter: &mut RoundMeter) -> Result<Option<Vec<usize>>> {
        Ok(fanout::run_round(self, &self.plan, config, key, meter)?.map(sorted))
    }

    fn position(&self, element: usize) -> usize {
        self.free.binary_search(&element).expect("proposal outside the free set")
    }
}

fn has_duplicates(v: &[usize]) -> bool {
    let s = sorted(v.to_vec());
    s.windows(2).any(|w| w[0] == w[1])
}

impl<O: CountingOracle + ?Sized> RatioTarget for SymmetricBatch<'_, O> {
    type Draw = Vec<usize>;

    fn propose(&self, rng: &mut StreamRng) -> Result<Vec<usize>> {
        Ok((0..self.t).map(|_| self.free[draw(&self.dist, rng)]).collect())
    }

    fn log_ratio(&self, tuple: &Vec<usize>) -> Result<Option<f64>> {
        if has_duplicates(tuple) {
            return Ok(None);
        }
        let joint = self.oracle.inclusion_probability(&self.given, tuple)?;
        if !(joint > 0.0) {
            return Ok(None);
        }
        let ln_p: f64 = tuple.iter().map(|&e| self.p[self.position(e)].ln()).sum();
        Ok(Some(joint.ln() + self.t as f64 * (self.k as f64).ln() - ln_falling(self.k, self.t) - ln_p))
    }

    fn draw_target(&self, rng: &mut StreamRng) -> Result<(Vec<usize>, Option<f64>)> {
        let mut tuple = Vec::with_capacity(self.t);
        let mut ln_joint = 0.0;
        for _ in 0..self.t {
            let mut cond = self.given.clone();
            cond.extend(&tuple);
            let q = self.oracle.marginals(&sorted(cond.clone()))?;
            let options: Vec<usize> = self.free.iter().copied().filter(|e| !tuple.contains(e)).collect();
            let weights: Vec<f64> = options.iter().map(|&e| q[e]).collect();
            let pick = options[draw(&weighted_index(&weights)?, rng)];
            ln_joint += q[pick].ln();
            tuple.push(pick);
        }
        let ln_p: f64 = tuple.iter().map(|&e| self.p[self.position(e)].ln()).sum();
        let lr = ln_joint + self.t as f64 * (self.k as f64).ln() - ln_falling(self.k, self.t) - ln_p;
        Ok((tuple, Some(lr)))
    }
}

/// Failure budget of one round of a size-`k` run: `δ / (2√k)`.
pub(crate) fn round_delta(delta: f64, k: usize) -> f64 {
    delta / (2.0 * (k.max(1) as f64).sqrt())
}

/// Draws `t` elements distributed as a uniform `t`-subset of a sample
/// conditioned on `given`. Fails with [`Error::RoundBudgetExceeded`] when
/// the round's fan-out yields no acceptance.
pub fn batch_sample_symmetric<O: CountingOracle + ?Sized>(
    oracle: &O,
    given: &[usize],
    t: usize,
    config: &SamplerConfig,
    meter: &mut RoundMeter,
) -> Result<Vec<usize>> {
    let k = oracle.sample_size().unwrap_or(0);
    let batch = SymmetricBatch::new(oracle, given, t, round_delta(config.delta, k))?;
    batch.run(config, &[tag::ROUND, given.len() as u64], meter)?.ok_or(Error::RoundBudgetExceeded)
}

/// Exact sampler with batches of `⌈√k_i⌉` elements.
pub fn sample_symmetric<O: CountingOracle + ?Sized>(oracle: &O, k: usize, config: &SamplerConfig) -> Result<SampleResult> {
    config.validate()?;
    let delta = round_delta(config.delta, k);
    batched_sample(oracle, k, symmetric_batch_size, Status::Exact, |req, meter| {
        let batch = SymmetricBatch::new(oracle, req.given, req.t, delta)?;
        batch.run(config, &[tag::ROUND, req.batch], meter)
    })
}
