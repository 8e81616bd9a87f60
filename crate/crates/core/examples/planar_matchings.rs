//! Perfect matchings of planar graphs: Kasteleyn counting, edge marginals,
//! separators and uniform sampling by separator recursion.

use pardpp::planar::{count_matchings, edge_marginal, find_separator, PlanarGraph, PlanarSampler};

fn main() -> pardpp::Result<()> {
    let g = PlanarGraph::grid(4, 4)?;
    println!("4x4 grid: {} perfect matchings", count_matchings(&g)?);
    for ((u, v), p) in edge_marginal(&g, 0, &[])? {
        println!("  P[({u},{v}) matched] = {p:.4}");
    }

    for w in [6usize, 10, 14] {
        let g = PlanarGraph::grid(w, w)?;
        let sep = find_separator(&g);
        let sampler = PlanarSampler::new(&g)?;
        let fast = sampler.sample(7)?;
        let slow = sampler.sample_sequential(7)?;
        assert!(fast.is_perfect_for(&g) && slow.is_perfect_for(&g));
        println!(
            "{w}x{w} grid: separator {} of {} vertices, {} rounds by separators, {} sequential",
            sep.separator.len(),
            g.n(),
            fast.meter.adaptive_rounds,
            slow.meter.adaptive_rounds
        );
    }

    let k5 = (0..5).flat_map(|u| (u + 1..5).map(move |v| (u, v))).collect::<Vec<_>>();
    println!("K5: {:?}", PlanarGraph::new(5, &k5).err());
    Ok(())
}
