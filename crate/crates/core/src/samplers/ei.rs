//! Batched modified-rejection sampler for entropically independent measures.
//!
//! Each batch works on the isotropic subdivision of the current conditional.
//! A proposal is `t` i.i.d. copies drawn by copy marginal; its likelihood
//! ratio against the ordered-copy target is
//! `L = Π_j q_j(i_j)·k / ((k - j)·p_{i_j})`, where `q_j` are the marginals
//! given the earlier picks. Copy multiplicities cancel, so copies are tracked
//! by their element only; repeating an element has target mass zero.
//! Proposals leaving the retained set or with `L > |U|^B` are rejected.

use rand::distr::weighted::WeightedIndex;

use super::batched::{batched_sample, ei_batch_size};
use super::fanout::{self, Plan, RatioTarget};
use super::isotropic::{isotropic_transform, IsotropicTransform};
use super::{draw, free_elements, sorted, weighted_index, RoundMeter, SampleResult, SamplerConfig, Status};
use crate::error::{Error, Result};
use crate::models::CountingOracle;
use crate::rng::{tag, StreamRng};

pub struct EiBatch<'a, O: ?Sized> {
    oracle: &'a O,
    given: Vec<usize>,
    free: Vec<usize>,
    transform: IsotropicTransform,
    dist: WeightedIndex<f64>,
    t: usize,
    k: usize,
    plan: Plan,
}

impl<'a, O: CountingOracle + ?Sized> EiBatch<'a, O> {
    /// `eps_step` is the accuracy budget of this batch.
    pub fn new(oracle: &'a O, given: &[usize], t: usize, eps_step: f64, config: &SamplerConfig) -> Result<Self> {
        let k_total = oracle
            .sample_size()
            .ok_or_else(|| Error::InvalidModel("batched sampling needs a fixed sample size".into()))?;
        let given = sorted(given.to_vec());
        let k = k_total.checked_sub(given.len()).ok_or(Error::ZeroConditional)?;
        if t == 0 || t > k {
            return Err(Error::InvalidArgument(format!("batch size {t} must lie in 1..={k}")));
        }
        let marginals = oracle.marginals(&given)?;
        let free = free_elements(oracle.ground_size(), &given);
        let p: Vec<f64> = free.iter().map(|&i| marginals[i]).collect();
        let beta = config.beta.unwrap_or_else(|| (eps_step / (32.0 * k as f64)).powi(2));
        let transform = isotropic_transform(&p, k, beta)?;
        let weights: Vec<f64> = (0..free.len()).map(|j| transform.copy_marginal(j) * transform.copies[j] as f64).collect();
        let dist = weighted_index(&weights)?;
        let plan = Plan {
            log_bound: config.ratio_exponent() * (transform.total_copies() as f64).ln(),
            attempts: (1.0 / eps_step).ln().ceil().max(1.0),
            strict: false,
        };
        Ok(Self { oracle, given, free, transform, dist, t, k, plan })
    }

    pub fn transform(&self) -> &IsotropicTransform {
        &self.transform
    }

    /// `ln |U|^B`.
    pub fn log_threshold(&self) -> f64 {
        self.plan.log_bound
    }

    /// Acceptance probability of an ordered proposal of original indices.
    pub fn acceptance_probability(&self, tuple: &[usize]) -> Result<f64> {
        let tuple = tuple.to_vec();
        if !self.admissible(&tuple) {
            return Ok(0.0);
        }
        Ok(match self.log_ratio(&tuple)? {
            Some(lr) if lr <= self.plan.log_bound => (lr - self.plan.log_bound).exp(),
            _ => 0.0,
        })
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

    fn step_log_ratio(&self, j: usize, element: usize, q: f64) -> f64 {
        let p = self.transform.marginals[self.position(element)];
        (q * self.k as f64 / ((self.k - j) as f64 * p)).ln()
    }
}

impl<O: CountingOracle + ?Sized> RatioTarget for EiBatch<'_, O> {
    type Draw = Vec<usize>;

    fn propose(&self, rng: &mut StreamRng) -> Result<Vec<usize>> {
        Ok((0..self.t).map(|_| self.free[draw(&self.dist, rng)]).collect())
    }

    fn log_ratio(&self, tuple: &Vec<usize>) -> Result<Option<f64>> {
        let mut seen = self.given.clone();
        let mut total = 0.0;
        for (j, &e) in tuple.iter().enumerate() {
            if seen.binary_search(&e).is_ok() {
                return Ok(None);
            }
            let q = self.oracle.inclusion_probability(&seen, &[e])?;
            if !(q > 0.0) {
                return Ok(None);
            }
            total += self.step_log_ratio(j, e, q);
            let at = seen.binary_search(&e).unwrap_err();
            seen.insert(at, e);
        }
        Ok(Some(total))
    }

    fn admissible(&self, tuple: &Vec<usize>) -> bool {
        tuple.iter().all(|&e| self.transform.retained[self.position(e)])
    }

    fn draw_target(&self, rng: &mut StreamRng) -> Result<(Vec<usize>, Option<f64>)> {
        let mut seen = self.given.clone();
        let mut tuple = Vec::with_capacity(self.t);
        let mut total = 0.0;
        for j in 0..self.t {
            let q = self.oracle.marginals(&seen)?;
            let options: Vec<usize> = self.free.iter().copied().filter(|e| !tuple.contains(e)).collect();
            let weights: Vec<f64> = options.iter().map(|&e| q[e]).collect();
            let pick = options[draw(&weighted_index(&weights)?, rng)];
            total += self.step_log_ratio(j, pick, q[pick]);
            tuple.push(pick);
            let at = seen.binary_search(&pick).unwrap_err();
            seen.insert(at, pick);
        }
        Ok((tuple, Some(total)))
    }
}

/// Draws `t` elements approximately distributed as a uniform `t`-subset of
/// a sample conditioned on `given`.
pub fn batch_sample_ei<O: CountingOracle + ?Sized>(
    oracle: &O,
    given: &[usize],
    t: usize,
    config: &SamplerConfig,
    meter: &mut RoundMeter,
) -> Result<Vec<usize>> {
    let k = oracle.sample_size().unwrap_or(1).max(1);
    let batch = EiBatch::new(oracle, given, t, config.eps / k as f64, config)?;
    batch.run(config, &[tag::ROUND, given.len() as u64], meter)?.ok_or(Error::BatchRejected)
}

/// Approximate sampler with batches of `max(1, ⌊k_i^{1/2-c}⌋)` elements and
/// per-batch accuracy `ε/k`.
pub fn sample_ei<O: CountingOracle + ?Sized>(oracle: &O, k: usize, config: &SamplerConfig) -> Result<SampleResult> {
    config.validate()?;
    let eps_step = config.eps / k.max(1) as f64;
    let c = config.depth_exponent;
    batched_sample(oracle, k, |r| ei_batch_size(r, c), Status::Approximate { eps: config.eps }, |req, meter| {
        let batch = EiBatch::new(oracle, req.given, req.t, eps_step, config)?;
        batch.run(config, &[tag::ROUND, req.batch], meter)
    })
}
