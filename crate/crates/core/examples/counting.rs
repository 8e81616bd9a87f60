//! Counting oracles: partition functions, conditional counts and marginals
//! for plain, cardinality-constrained and partition-constrained DPPs.

use pardpp::models::DppModel;
use pardpp::numerics::EnsembleMatrix;

fn main() -> pardpp::Result<()> {
    let l = EnsembleMatrix::from_rows(&[
        vec![2.0, 0.5, 0.3, 0.0],
        vec![0.5, 1.5, 0.2, 0.1],
        vec![0.3, 0.2, 1.0, 0.4],
        vec![0.0, 0.1, 0.4, 3.0],
    ])?;

    let plain = DppModel::plain(l.clone())?;
    println!("plain DPP: Z = {:.6}, count(T={{0}}) = {:.6}", plain.count(&[])?, plain.count(&[0])?);
    println!("  marginals {:?}", rounded(&plain.marginals(&[])?));
    println!("  size distribution {:?}", rounded(&plain.size_distribution()?));

    let two = DppModel::k_dpp(l.clone(), 2)?;
    println!("2-DPP: Z = {:.6}, P[1 in S | 3 in S] = {:.6}", two.count(&[])?, two.marginal(1, &[3])?);

    let part = DppModel::partition(l, vec![vec![0, 1], vec![2, 3]], vec![1, 1])?;
    println!("partition DPP (one from each pair): Z = {:.6}", part.count(&[])?);
    let state = part.condition(&[0])?;
    println!(
        "  after choosing 0: residual ground set {:?}, residual Z = {:.6}",
        state.index_map,
        state.residual.count(&[])?
    );
    Ok(())
}

fn rounded(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1e4).round() / 1e4).collect()
}
