//! Simulated parallel proposal fan-out for (modified) rejection sampling.
//!
//! A round launches `N = ⌈M·A⌉` independent trials, where `M` bounds the
//! likelihood ratio and `A` sets the failure exponent. Trial `j` draws from
//! its own stream; the first accepted trial in index order wins.
//!
//! When `N` exceeds the literal budget the round is simulated by promotion:
//! each trial is promoted independently with probability `1/M`, a promoted
//! trial draws from the target itself and is accepted iff the draw lies in
//! the admissible set with ratio at most `M`. This has the same law for the
//! winning draw and for failure as the literal loop.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;

use super::{RoundMeter, SamplerConfig};
use crate::error::{Error, Result};
use crate::rng::{stream, tag, StreamRng};

/// Largest `M` for which the promotion count is drawn binomially.
const BINOMIAL_BOUND_LIMIT: f64 = 1_099_511_627_776.0;

/// A target law together with a proposal law it can be compared against.
pub(crate) trait RatioTarget: Sync {
    type Draw: Send + Clone;

    fn propose(&self, rng: &mut StreamRng) -> Result<Self::Draw>;

    /// `ln(target/proposal)` at a draw; `None` where the target has no mass.
    fn log_ratio(&self, draw: &Self::Draw) -> Result<Option<f64>>;

    /// Membership in the restricted set, apart from the ratio bound.
    fn admissible(&self, _draw: &Self::Draw) -> bool {
        true
    }

    /// Exact draw from the target, with its log ratio.
    fn draw_target(&self, rng: &mut StreamRng) -> Result<(Self::Draw, Option<f64>)>;
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Plan {
    /// `ln M`.
    pub log_bound: f64,
    /// `A`: trials per unit of `M`.
    pub attempts: f64,
    /// Treat a ratio above `M` as a violated proof obligation, not a rejection.
    pub strict: bool,
}

impl Plan {
    pub fn width(&self) -> f64 {
        (self.log_bound.exp() * self.attempts).ceil()
    }
}

fn saturating(x: f64) -> u64 {
    if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        x as u64
    }
}

/// Outcome of a single literal trial.
pub(crate) fn trial<T: RatioTarget>(target: &T, plan: &Plan, seed: u64, key: &[u64], j: u64) -> Result<Option<T::Draw>> {
    let mut path = key.to_vec();
    path.extend([tag::PROPOSAL, j]);
    let mut rng = stream(seed, &path);
    let draw = target.propose(&mut rng)?;
    let u: f64 = rng.random();
    let Some(lr) = target.log_ratio(&draw)? else {
        return Ok(None);
    };
    if lr > plan.log_bound {
        if plan.strict && lr - plan.log_bound > 1e-9f64.ln_1p() {
            return Err(Error::RatioBoundViolated { ratio: lr.exp(), bound: plan.log_bound.exp() });
        }
        if !plan.strict {
            return Ok(None);
        }
    }
    if !target.admissible(&draw) {
        return Ok(None);
    }
    Ok((u < (lr - plan.log_bound).exp()).then_some(draw))
}

/// One adaptive round of fan-out. `None` when every trial is rejected.
pub(crate) fn run_round<T: RatioTarget>(
    target: &T,
    plan: &Plan,
    config: &SamplerConfig,
    key: &[u64],
    meter: &mut RoundMeter,
) -> Result<Option<T::Draw>> {
    let width = plan.width();
    meter.record_round(saturating(width));
    if width <= config.max_proposals_per_round as f64 {
        literal(target, plan, config, key, width as u64, meter)
    } else {
        promoted(target, plan, config, key, meter)
    }
}

fn literal<T: RatioTarget>(
    target: &T,
    plan: &Plan,
    config: &SamplerConfig,
    key: &[u64],
    width: u64,
    meter: &mut RoundMeter,
) -> Result<Option<T::Draw>> {
    let chunk = (config.workers.max(1) as u64) * 4;
    let mut start = 0;
    while start < width {
        let end = (start + chunk).min(width);
        let results: Vec<Result<Option<T::Draw>>> = if config.workers > 1 {
            (start..end).into_par_iter().map(|j| trial(target, plan, config.seed, key, j)).collect()
        } else {
            let mut out = Vec::new();
            for j in start..end {
                let r = trial(target, plan, config.seed, key, j);
                let stop = !matches!(r, Ok(None));
                out.push(r);
                if stop {
                    break;
                }
            }
            out
        };
        for (offset, r) in results.into_iter().enumerate() {
            if let Some(draw) = r? {
                meter.proposals_evaluated += start + offset as u64 + 1;
                return Ok(Some(draw));
            }
        }
        start = end;
    }
    meter.proposals_evaluated += width;
    Ok(None)
}

fn promoted<T: RatioTarget>(
    target: &T,
    plan: &Plan,
    config: &SamplerConfig,
    key: &[u64],
    meter: &mut RoundMeter,
) -> Result<Option<T::Draw>> {
    let width = plan.width();
    let mut path = key.to_vec();
    path.push(tag::PROMOTED);
    let mut rng = stream(config.seed, &path);
    let p = (-plan.log_bound).exp();
    let promoted: u64 = if plan.log_bound.exp() <= BINOMIAL_BOUND_LIMIT && width < u64::MAX as f64 {
        Binomial::new(width as u64, p.min(1.0)).map_err(|e| Error::InvalidArgument(e.to_string()))?.sample(&mut rng)
    } else {
        // Binomial(N, 1/M) with N/M = A and M beyond any realizable width.
        Poisson::new(plan.attempts).map_err(|e| Error::InvalidArgument(e.to_string()))?.sample(&mut rng) as u64
    };
    for i in 0..promoted {
        path.truncate(key.len() + 1);
        path.push(i);
        let mut trial_rng = stream(config.seed, &path);
        let (draw, lr) = target.draw_target(&mut trial_rng)?;
        meter.proposals_evaluated += 1;
        if let Some(lr) = lr {
            if plan.strict && lr - plan.log_bound > 1e-9f64.ln_1p() {
                return Err(Error::RatioBoundViolated { ratio: lr.exp(), bound: plan.log_bound.exp() });
            }
            if lr <= plan.log_bound && target.admissible(&draw) {
                return Ok(Some(draw));
            }
        }
    }
    Ok(None)
}
