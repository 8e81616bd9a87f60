//! Sampling algorithms over counting oracles, with adaptive-round metering.
//!
//! Every sampler is deterministic given [`SamplerConfig::seed`]: random
//! choices come from streams addressed by the seed and a structural path,
//! so the result does not depend on [`SamplerConfig::workers`].

mod batched;
mod cardinality;
mod ei;
mod fanout;
mod filtered;
mod isotropic;
mod prepared;
mod sequential;
mod symmetric;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

pub use batched::{batched_sample, symmetric_batch_size, ei_batch_size, BatchRequest};
pub use cardinality::{sample_dpp_via_cardinality, sample_size_then};
pub use ei::{batch_sample_ei, sample_ei, EiBatch};
pub use filtered::{filtered_sample, filtered_sample_traced, one_step_bernoulli_sample, FilterTrace};
pub use isotropic::{isotropic_transform, IsotropicTransform};
pub use prepared::{PreparedModel, SamplerKind};
pub use sequential::sequential_sample;
pub use symmetric::{batch_sample_symmetric, sample_symmetric, SymmetricBatch};

use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// Counters for the parallel-time accounting of one sampler run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundMeter {
    /// Sequential barriers: rounds whose outcome feeds the next step.
    pub adaptive_rounds: u64,
    /// Trials launched across all rounds (saturating).
    pub proposal_work: u64,
    /// Largest fan-out of a single round (saturating).
    pub max_width: u64,
    /// Trials actually evaluated, in index order, up to each round's winner.
    pub proposals_evaluated: u64,
}

impl RoundMeter {
    pub fn record_round(&mut self, width: u64) {
        self.adaptive_rounds += 1;
        self.proposal_work = self.proposal_work.saturating_add(width);
        self.max_width = self.max_width.max(width);
    }

    /// Combines meters of independent subproblems run side by side.
    pub fn merge_parallel(&mut self, other: &RoundMeter) {
        self.adaptive_rounds = self.adaptive_rounds.max(other.adaptive_rounds);
        self.proposal_work = self.proposal_work.saturating_add(other.proposal_work);
        self.max_width = self.max_width.max(other.max_width);
        self.proposals_evaluated = self.proposals_evaluated.saturating_add(other.proposals_evaluated);
    }

    /// Appends a meter of a later phase.
    pub fn merge_sequential(&mut self, other: &RoundMeter) {
        self.adaptive_rounds += other.adaptive_rounds;
        self.proposal_work = self.proposal_work.saturating_add(other.proposal_work);
        self.max_width = self.max_width.max(other.max_width);
        self.proposals_evaluated = self.proposals_evaluated.saturating_add(other.proposals_evaluated);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Status {
    Exact,
    Approximate { eps: f64 },
    Failed,
}

impl Status {
    pub fn is_failed(&self) -> bool {
        matches!(self, Status::Failed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    /// Sorted original indices.
    pub sample: Vec<usize>,
    pub meter: RoundMeter,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Target total-variation accuracy of approximate samplers.
    pub eps: f64,
    /// Depth exponent `c` of the EI batch size `⌊k^{1/2-c}⌋`.
    pub depth_exponent: f64,
    /// Ratio exponent `B`; `None` means `3/c`.
    pub ratio_exponent: Option<f64>,
    /// Subdivision parameter; `None` means `(ε'/(32k))²` per step.
    pub beta: Option<f64>,
    /// Largest fan-out evaluated trial by trial; wider rounds are simulated.
    pub max_proposals_per_round: u64,
    /// Failure probability budget of exact samplers.
    pub delta: f64,
    /// Threads used to evaluate proposals. Never changes results.
    pub workers: usize,
    /// Iteration constant of the filtered sampler.
    pub filter_rounds_constant: f64,
    /// Size-cutoff constant of the one-step sampler.
    pub size_cutoff_constant: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            eps: 0.01,
            depth_exponent: 0.1,
            ratio_exponent: None,
            beta: None,
            max_proposals_per_round: 1 << 20,
            delta: 1e-9,
            workers: 1,
            filter_rounds_constant: 4.0,
            size_cutoff_constant: 10.0,
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn ratio_exponent(&self) -> f64 {
        self.ratio_exponent.unwrap_or(3.0 / self.depth_exponent)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad("eps must lie in (0, 1)");
        }
        if !(self.depth_exponent > 0.0 && self.depth_exponent < 0.5) {
            return bad("depth exponent c must lie in (0, 1/2)");
        }
        if !(self.ratio_exponent() >= 1.0) {
            return bad("ratio exponent B must be at least 1");
        }
        if let Some(beta) = self.beta {
            if !(beta > 0.0 && beta < 1.0) {
                return bad("beta must lie in (0, 1)");
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if self.max_proposals_per_round == 0 {
            return bad("max proposals per round must be positive");
        }
        if self.workers == 0 {
            return bad("workers must be positive");
        }
        if !(self.filter_rounds_constant > 0.0 && self.size_cutoff_constant > 0.0) {
            return bad("filter constants must be positive");
        }
        Ok(())
    }
}

/// Draws an index with probability proportional to `weights`.
pub(crate) fn weighted_index(weights: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(weights.iter().map(|&w| w.max(0.0))).map_err(|_| Error::ZeroConditional)
}

pub(crate) fn draw(dist: &WeightedIndex<f64>, rng: &mut StreamRng) -> usize {
    dist.sample(rng)
}

/// Elements of `0..n` outside the sorted set `given`.
pub(crate) fn free_elements(n: usize, given: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| given.binary_search(i).is_err()).collect()
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

#[cfg(test)]
mod tests;
