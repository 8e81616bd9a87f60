//! Counter-based streams: the same master seed gives the same draws no
//! matter how many threads evaluate them.

use pardpp::models::DppModel;
use pardpp::numerics::EnsembleMatrix;
use pardpp::rng::{derive_seed, tag};
use pardpp::samplers::{PreparedModel, SamplerConfig, SamplerKind};
use rayon::prelude::*;

fn main() -> pardpp::Result<()> {
    let model = PreparedModel::new(DppModel::k_dpp(EnsembleMatrix::identity(30), 8)?)?;
    let draw = |i: u64| {
        let seed = derive_seed(42, &[tag::SAMPLE, i]);
        model.sample(SamplerKind::BatchedSymmetric, &SamplerConfig::with_seed(seed)).map(|r| r.sample)
    };
    let serial: Vec<_> = (0..64).map(draw).collect::<pardpp::Result<_>>()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().expect("thread pool");
    let parallel: Vec<_> = pool.install(|| (0..64).into_par_iter().map(draw).collect::<pardpp::Result<_>>())?;
    assert_eq!(serial, parallel);
    println!("64 draws identical on 1 and 4 threads; first three: {:?}", &serial[..3]);
    Ok(())
}
