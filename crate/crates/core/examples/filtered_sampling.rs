//! Filtered sampling of a symmetric DPP whose marginal kernel has a small
//! top eigenvalue, with the per-iteration eigenvalue trace.

use pardpp::models::DppModel;
use pardpp::numerics::ensemble_from_kernel;
use pardpp::rng::stream;
use pardpp::samplers::{filtered_sample_traced, SamplerConfig};
use pardpp::validation::generators::random_kernel;

fn main() -> pardpp::Result<()> {
    let kernel = random_kernel(40, 0.3, &mut stream(3, &[]))?;
    let model = DppModel::plain(ensemble_from_kernel(&kernel)?)?;
    for seed in 0..3 {
        let (result, trace) = filtered_sample_traced(&model, &SamplerConfig { eps: 0.05, ..SamplerConfig::with_seed(seed) })?;
        println!(
            "seed {seed}: |S| = {:>2}, alpha = {:.3}, {} iterations, {} rounds, top eigenvalue {:.3} -> {:.3}",
            result.sample.len(),
            trace.alpha,
            trace.iterations,
            result.meter.adaptive_rounds,
            trace.lambda,
            trace.lambdas.iter().copied().fold(0.0, f64::max),
        );
    }
    Ok(())
}
