//! Approximate sampling for nonsymmetric and partition-constrained DPPs
//! through batched rejection over an isotropic subdivision.

use pardpp::models::DppModel;
use pardpp::numerics::EnsembleMatrix;
use pardpp::samplers::{PreparedModel, SamplerConfig, SamplerKind};
use pardpp::validation::{brute_force_distribution, tv_distance, ExactDistribution};
use rayon::prelude::*;

fn main() -> pardpp::Result<()> {
    let l = EnsembleMatrix::from_rows(&[
        vec![1.0, 0.5, 0.0, 0.2],
        vec![-0.5, 1.0, 0.3, 0.0],
        vec![0.0, -0.3, 2.0, 0.4],
        vec![-0.2, 0.0, -0.4, 1.5],
    ])?;
    let models = [
        ("nonsymmetric 2-DPP", DppModel::k_dpp(l.clone(), 2)?),
        ("partition {0,1}:1 {2,3}:1", DppModel::partition(l, vec![vec![0, 1], vec![2, 3]], vec![1, 1])?),
    ];
    let config = SamplerConfig { eps: 0.05, ..SamplerConfig::default() };
    for (name, model) in models {
        let exact = brute_force_distribution(&model)?;
        let model = PreparedModel::new(model)?;
        let results: Vec<_> = (0..20_000u64)
            .into_par_iter()
            .map(|s| model.sample(SamplerKind::Ei, &SamplerConfig { seed: s, ..config.clone() }))
            .collect::<pardpp::Result<_>>()?;
        let failed = results.iter().filter(|r| r.status.is_failed()).count();
        let rounds = results.iter().map(|r| r.meter.adaptive_rounds).max().unwrap_or(0);
        let tv = tv_distance(&ExactDistribution::from_results(&results)?, &exact);
        println!("{name}: tv {tv:.4}, {failed} failed draws, at most {rounds} rounds, status {:?}", results[0].status);
    }
    Ok(())
}
