use super::{draw, free_elements, sorted, weighted_index, RoundMeter, SampleResult, Status};
use crate::error::{Error, Result};
use crate::models::CountingOracle;
use crate::rng::{stream, tag};

/// Exact baseline: one element per round, drawn from the conditional
/// marginals and then conditioned on.
pub fn sequential_sample<O: CountingOracle + ?Sized>(oracle: &O, k: usize, seed: u64) -> Result<SampleResult> {
    if let Some(size) = oracle.sample_size() {
        if size != k {
            return Err(Error::InvalidArgument(format!("model draws sets of size {size}, not {k}")));
        }
    }
    if oracle.log_count(&[])? == f64::NEG_INFINITY {
        return Err(Error::ZeroMass);
    }
    let n = oracle.ground_size();
    let mut meter = RoundMeter::default();
    let mut given = Vec::with_capacity(k);
    for step in 0..k {
        let q = oracle.marginals(&given)?;
        let free = free_elements(n, &given);
        let weights: Vec<f64> = free.iter().map(|&i| q[i]).collect();
        let dist = weighted_index(&weights)?;
        let mut rng = stream(seed, &[tag::STEP, step as u64]);
        meter.record_round(free.len() as u64);
        meter.proposals_evaluated += 1;
        given.push(free[draw(&dist, &mut rng)]);
        given = sorted(given);
    }
    Ok(SampleResult { sample: given, meter, status: Status::Exact })
}
