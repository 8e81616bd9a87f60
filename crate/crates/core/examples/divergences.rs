//! KL and λ-divergences, the comparison bound for near-uniform references,
//! and the entropic-independence spot check.

use pardpp::models::DppModel;
use pardpp::rng::stream;
use pardpp::validation::generators::random_symmetric_psd;
use pardpp::validation::{ei_spot_check, kl_divergence, klrenyi_bound, renyi_divergence};

fn main() -> pardpp::Result<()> {
    let p = [0.2, 0.3, 0.25, 0.25];
    let q = [0.5, 0.1, 0.4, 0.0];
    let kl = kl_divergence(&q, &p)?;
    let c = p.iter().fold(0.0f64, |m, &x| m.max(4.0 * x).max(1.0 / (4.0 * x)));
    for lambda in [1.5, 2.0] {
        println!(
            "λ = {lambda}: D = {:.4} <= bound {:.4} (KL = {kl:.4}, C = {c:.2})",
            renyi_divergence(&q, &p, lambda)?,
            klrenyi_bound(kl, p.len(), c, lambda)
        );
    }

    let l = random_symmetric_psd(7, 0.1, 5.0, &mut stream(11, &[]))?;
    let model = DppModel::k_dpp(l, 3)?;
    let report = ei_spot_check(&model, 1.0, 500, 0)?;
    println!(
        "3-DPP on 7 elements: worst KL ratio {:.4} vs 1/k = {:.4}, passed {}",
        report.worst_ratio, report.bound, report.passed
    );
    Ok(())
}
