#![allow(dead_code)]

use pardpp::samplers::SampleResult;
use pardpp::validation::{tv_distance, ExactDistribution};
use pardpp::Result;
use rayon::prelude::*;

/// Runs `f` on seeds `0..n` in parallel.
pub fn runs(n: u64, f: impl Fn(u64) -> Result<SampleResult> + Sync) -> Vec<SampleResult> {
    (0..n).into_par_iter().map(|s| f(s).expect("sampler error")).collect()
}

pub fn empirical_tv(results: &[SampleResult], exact: &ExactDistribution) -> f64 {
    tv_distance(&ExactDistribution::from_results(results).unwrap(), exact)
}
