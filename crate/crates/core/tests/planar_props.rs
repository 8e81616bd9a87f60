use std::collections::HashMap;

use pardpp::planar::{
    count_matchings, edge_marginal, find_separator, find_separator_in, KasteleynOrientation, PlanarGraph, PlanarSampler,
};
use pardpp::rng::stream;
use pardpp::validation::{enumerate_perfect_matchings, generators::random_planar_edges};
use pardpp::Error;
use proptest::prelude::*;
use rand::Rng;
use rayon::prelude::*;
use rustworkx_core::petgraph::graph::UnGraph;
use rustworkx_core::planar::is_planar;

fn reference_planar(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut g = UnGraph::<(), ()>::with_capacity(n, edges.len());
    for _ in 0..n {
        g.add_node(());
    }
    for &(u, v) in edges {
        g.add_edge((u as u32).into(), (v as u32).into(), ());
    }
    is_planar(&g)
}

fn random_graph(seed: u64, n: usize, keep: f64) -> PlanarGraph {
    PlanarGraph::new(n, &random_planar_edges(n, keep, &mut stream(seed, &[]))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn planarity_agrees_with_reference(seed in any::<u64>(), n in 4usize..14, extra in 0usize..6, keep in 0.5f64..1.0) {
        let mut rng = stream(seed, &[]);
        let mut edges = random_planar_edges(n, keep, &mut rng);
        for _ in 0..extra {
            let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
            let e = (u.min(v), u.max(v));
            if u != v && !edges.iter().any(|&(a, b)| (a.min(b), a.max(b)) == e) {
                edges.push(e);
            }
        }
        let ours = PlanarGraph::new(n, &edges);
        prop_assert_eq!(ours.is_ok(), reference_planar(n, &edges));
        if let Ok(g) = ours {
            prop_assert!(g.satisfies_euler());
        } else {
            prop_assert_eq!(ours.unwrap_err(), Error::NotPlanar);
        }
    }

    #[test]
    fn count_equals_enumeration(seed in any::<u64>(), half in 1usize..9, keep in 0.3f64..1.0) {
        let g = random_graph(seed, 2 * half, keep);
        let o = KasteleynOrientation::new(&g);
        let comps = g.components().into_iter().max().map_or(0, |c| c + 1);
        prop_assert!(o.even_faces(&g) <= comps);
        let exact = enumerate_perfect_matchings(g.n(), g.edges()).len() as f64;
        prop_assert_eq!(count_matchings(&g).unwrap(), exact);
    }

    #[test]
    fn marginals_match_enumeration(seed in any::<u64>(), half in 2usize..7, keep in 0.6f64..1.0, pick in any::<usize>()) {
        let g = random_graph(seed, 2 * half, keep);
        let all = enumerate_perfect_matchings(g.n(), g.edges());
        prop_assume!(!all.is_empty());
        let v = pick % g.n();
        let p = edge_marginal(&g, v, &[]).unwrap();
        let sum: f64 = p.iter().map(|x| x.1).sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        for ((_, u), x) in p {
            let e = (v.min(u), v.max(u));
            let freq = all.iter().filter(|m| m.contains(&e)).count() as f64 / all.len() as f64;
            prop_assert!((x - freq).abs() < 1e-9);
        }
    }

    #[test]
    fn separators_separate(seed in any::<u64>(), n in 2usize..40, keep in 0.4f64..1.0) {
        let g = random_graph(seed, n, keep);
        let s = find_separator(&g);
        prop_assert!(s.separates(&g));
        prop_assert_eq!(s.separator.len() + s.side_a.len() + s.side_b.len(), n);
        let half: Vec<usize> = (0..n).step_by(2).collect();
        let sub = find_separator_in(&g, &half);
        prop_assert_eq!(sub.separator.len() + sub.side_a.len() + sub.side_b.len(), half.len());
    }

    #[test]
    fn samples_are_perfect_matchings(seed in any::<u64>(), half in 1usize..12, keep in 0.6f64..1.0) {
        let g = random_graph(seed, 2 * half, keep);
        if let Ok(sampler) = PlanarSampler::new(&g) {
            let a = sampler.sample(seed).unwrap();
            prop_assert!(a.is_perfect_for(&g));
            prop_assert!(sampler.sample_sequential(seed).unwrap().is_perfect_for(&g));
        }
    }
}

#[test]
fn counts_of_fixed_families() {
    for n in (2..=16).step_by(2) {
        let path = PlanarGraph::path(n).unwrap();
        assert_eq!(count_matchings(&path).unwrap(), 1.0);
        if n >= 4 {
            let cycle = PlanarGraph::cycle(n).unwrap();
            let exact = enumerate_perfect_matchings(cycle.n(), cycle.edges()).len() as f64;
            assert_eq!(count_matchings(&cycle).unwrap(), exact);
        }
    }
    for (w, h) in [(2, 2), (2, 3), (3, 4), (4, 4), (2, 8)] {
        let g = PlanarGraph::grid(w, h).unwrap();
        let exact = enumerate_perfect_matchings(g.n(), g.edges()).len() as f64;
        assert_eq!(count_matchings(&g).unwrap(), exact);
    }
    assert_eq!(count_matchings(&PlanarGraph::grid(8, 8).unwrap()).unwrap(), 12_988_816.0);
}

fn frequencies(sampler: &PlanarSampler, n: u64) -> HashMap<Vec<(usize, usize)>, f64> {
    let samples: Vec<_> = (0..n).into_par_iter().map(|seed| sampler.sample(seed).unwrap()).collect();
    let mut freq = HashMap::new();
    for s in &samples {
        assert!(s.is_perfect_for(sampler.graph()));
        *freq.entry(s.matching.clone()).or_insert(0.0) += 1.0 / n as f64;
    }
    freq
}

#[test]
fn four_cycle_is_uniform() {
    let g = PlanarGraph::cycle(4).unwrap();
    let freq = frequencies(&PlanarSampler::new(&g).unwrap(), 100_000);
    assert_eq!(freq.len(), 2);
    assert!(freq.values().all(|&f| (f - 0.5).abs() <= 0.02));
}

#[test]
fn small_grid_is_uniform() {
    let g = PlanarGraph::grid(3, 2).unwrap();
    let freq = frequencies(&PlanarSampler::new(&g).unwrap(), 100_000);
    assert_eq!(freq.len(), 3);
    assert!(freq.values().all(|&f| (f - 1.0 / 3.0).abs() <= 0.01));
}

#[test]
fn four_by_four_grid_is_uniform() {
    let g = PlanarGraph::grid(4, 4).unwrap();
    let all = enumerate_perfect_matchings(16, g.edges());
    assert_eq!(all.len(), 36);
    let freq = frequencies(&PlanarSampler::new(&g).unwrap(), 100_000);
    let tv = 0.5 * all.iter().map(|m| (freq.get(m).copied().unwrap_or(0.0) - 1.0 / 36.0).abs()).sum::<f64>();
    assert!(freq.keys().all(|m| all.contains(m)));
    assert!(tv <= 3.0 * (36.0f64 / 200_000.0).sqrt() + 0.01, "tv = {tv}");
}

#[test]
fn grid_rounds_beat_sequential() {
    for w in [6usize, 8, 10, 12] {
        let g = PlanarGraph::grid(w, w).unwrap();
        let sampler = PlanarSampler::new(&g).unwrap();
        let half = (w * w / 2) as f64;
        for seed in 0..5 {
            let s = sampler.sample(seed).unwrap();
            assert!(s.is_perfect_for(&g));
            let rounds = s.meter.adaptive_rounds as f64;
            assert!(rounds <= 0.8 * half, "{w}x{w}: {rounds} rounds");
            assert_eq!(sampler.sample_sequential(seed).unwrap().meter.adaptive_rounds as f64, half);
        }
    }
}
