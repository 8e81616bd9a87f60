//! Exact sampling of a symmetric k-DPP: one element per round versus
//! batched rejection rounds, with the empirical law checked against the
//! exhaustive one.

use pardpp::models::{DppModel, Memoized};
use pardpp::numerics::EnsembleMatrix;
use pardpp::samplers::{sample_symmetric, sequential_sample, PreparedModel, SamplerConfig, SamplerKind};
use pardpp::validation::{brute_force_distribution, statistical_tolerance, tv_distance, ExactDistribution};
use rayon::prelude::*;

fn main() -> pardpp::Result<()> {
    for k in [16usize, 64, 256] {
        let model = Memoized::new(DppModel::k_dpp(EnsembleMatrix::identity(2 * k), k)?);
        let batched = sample_symmetric(&model, k, &SamplerConfig::with_seed(1))?;
        let sequential = sequential_sample(&model, k, 1)?;
        println!(
            "k = {k:>3}: batched {:>3} rounds, sequential {:>3} rounds",
            batched.meter.adaptive_rounds, sequential.meter.adaptive_rounds
        );
    }

    let l = EnsembleMatrix::diagonal(&[1.0, 2.0, 3.0, 0.5, 1.5])?;
    let model = PreparedModel::new(DppModel::k_dpp(l, 2)?)?;
    let exact = brute_force_distribution(model.model())?;
    let n = 50_000;
    let results: Vec<_> = (0..n)
        .into_par_iter()
        .map(|s| model.sample(SamplerKind::BatchedSymmetric, &SamplerConfig::with_seed(s)))
        .collect::<pardpp::Result<_>>()?;
    let tv = tv_distance(&ExactDistribution::from_results(&results)?, &exact);
    println!("diag 2-DPP: tv {tv:.4} at {n} samples (noise level {:.4})", statistical_tolerance(exact.len(), n as usize));
    Ok(())
}
