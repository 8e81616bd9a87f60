use super::{sorted, RoundMeter, SampleResult, Status};
use crate::error::{Error, Result};
use crate::models::CountingOracle;

/// One step of a batched sampler: draw `t` further elements given `given`.
#[derive(Clone, Copy, Debug)]
pub struct BatchRequest<'a> {
    /// Elements chosen so far, sorted.
    pub given: &'a [usize],
    /// Elements still to choose.
    pub remaining: usize,
    pub t: usize,
    /// Index of this batch within the run.
    pub batch: u64,
}

/// `⌈√k⌉`.
pub fn symmetric_batch_size(k: usize) -> usize {
    let mut r = (k as f64).sqrt() as usize;
    while r * r < k {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= k {
        r -= 1;
    }
    r
}

/// `max(1, ⌊k^{1/2-c}⌋)`.
pub fn ei_batch_size(k: usize, c: f64) -> usize {
    ((k as f64).powf(0.5 - c) + 1e-12).floor().max(1.0) as usize
}

/// Builds a size-`k` sample in batches of `batch_size(k_remaining)`
/// elements, each drawn by `step` conditioned on everything chosen before.
/// A step returning `None` ends the run with [`Status::Failed`].
pub fn batched_sample<O, B, F>(oracle: &O, k: usize, batch_size: B, success: Status, mut step: F) -> Result<SampleResult>
where
    O: CountingOracle + ?Sized,
    B: Fn(usize) -> usize,
    F: FnMut(&BatchRequest, &mut RoundMeter) -> Result<Option<Vec<usize>>>,
{
    if let Some(size) = oracle.sample_size() {
        if size != k {
            return Err(Error::InvalidArgument(format!("model draws sets of size {size}, not {k}")));
        }
    }
    if oracle.log_count(&[])? == f64::NEG_INFINITY {
        return Err(Error::ZeroMass);
    }
    let mut meter = RoundMeter::default();
    let mut given: Vec<usize> = Vec::with_capacity(k);
    let mut batch = 0;
    while given.len() < k {
        let remaining = k - given.len();
        let t = batch_size(remaining).clamp(1, remaining);
        let request = BatchRequest { given: &given, remaining, t, batch };
        let Some(chosen) = step(&request, &mut meter)? else {
            return Ok(SampleResult { sample: given, meter, status: Status::Failed });
        };
        debug_assert_eq!(chosen.len(), t);
        given.extend(chosen);
        given = sorted(given);
        batch += 1;
    }
    Ok(SampleResult { sample: given, meter, status: success })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        let schedule = |k: usize| {
            let mut left = k;
            let mut sizes = Vec::new();
            while left > 0 {
                let t = symmetric_batch_size(left);
                sizes.push(t);
                left -= t;
            }
            sizes
        };
        assert_eq!(schedule(1), vec![1]);
        assert_eq!(schedule(16), vec![4, 4, 3, 3, 2]);
        assert!(schedule(100).len() <= 20);
        for k in 1..=400 {
            assert!(schedule(k).len() <= 2 * symmetric_batch_size(k) + 1);
        }
        assert_eq!(ei_batch_size(4, 0.1), 1);
        assert_eq!(ei_batch_size(6, 0.1), 2);
        assert_eq!(ei_batch_size(100, 0.1), 6);
    }
}
