use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kasteleyn::MatchingCounter;
use super::separator::find_separator_in;
use super::PlanarGraph;
use crate::error::{Error, Result};
use crate::rng::{set_key, stream, tag};
use crate::samplers::{draw, weighted_index, RoundMeter};

/// A perfect matching as sorted `(u, v)` pairs with `u < v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchingSample {
    pub matching: Vec<(usize, usize)>,
    pub meter: RoundMeter,
}

impl MatchingSample {
    /// Every vertex of `g` covered by exactly one edge of `g`.
    pub fn is_perfect_for(&self, g: &PlanarGraph) -> bool {
        let mut covered = vec![false; g.n()];
        for &(u, v) in &self.matching {
            if g.edge_index(u, v).is_none() || covered[u] || covered[v] {
                return false;
            }
            covered[u] = true;
            covered[v] = true;
        }
        covered.into_iter().all(|c| c)
    }
}

/// Exact uniform perfect-matching sampler with a reusable Kasteleyn matrix.
#[derive(Clone, Debug)]
pub struct PlanarSampler {
    counter: MatchingCounter,
}

impl PlanarSampler {
    pub fn new(g: &PlanarGraph) -> Result<Self> {
        if g.n() % 2 == 1 {
            return Err(Error::OddVertexCount);
        }
        let counter = MatchingCounter::new(g);
        let all: Vec<usize> = (0..g.n()).collect();
        counter.ln_count(&all).ok_or(Error::NoPerfectMatching)?;
        Ok(Self { counter })
    }

    pub fn graph(&self) -> &PlanarGraph {
        self.counter.graph()
    }

    pub fn counter(&self) -> &MatchingCounter {
        &self.counter
    }

    /// Separator recursion: separator vertices are matched one per round,
    /// then the remaining components recurse side by side.
    pub fn sample(&self, seed: u64) -> Result<MatchingSample> {
        let all: Vec<usize> = (0..self.graph().n()).collect();
        let (mut matching, meter) = self.solve_components(&all, seed)?;
        matching.sort_unstable();
        Ok(MatchingSample { matching, meter })
    }

    /// Baseline: the lowest unmatched vertex is matched in each round.
    pub fn sample_sequential(&self, seed: u64) -> Result<MatchingSample> {
        let mut rest: Vec<usize> = (0..self.graph().n()).collect();
        let mut meter = RoundMeter::default();
        let mut matching = Vec::with_capacity(rest.len() / 2);
        let mut step = 0u64;
        while let Some(&v) = rest.first() {
            let u = self.match_vertex(v, &rest, &mut stream(seed, &[tag::STEP, step]), &mut meter)?;
            matching.push((v.min(u), v.max(u)));
            rest.retain(|&x| x != u && x != v);
            step += 1;
        }
        matching.sort_unstable();
        Ok(MatchingSample { matching, meter })
    }

    fn match_vertex(
        &self,
        v: usize,
        active: &[usize],
        rng: &mut crate::rng::StreamRng,
        meter: &mut RoundMeter,
    ) -> Result<usize> {
        let probs = self.counter.edge_marginal(v, active)?;
        let weights: Vec<f64> = probs.iter().map(|p| p.1).collect();
        let j = draw(&weighted_index(&weights).map_err(|_| Error::NoPerfectMatching)?, rng);
        meter.record_round(probs.len() as u64);
        meter.proposals_evaluated += probs.len() as u64;
        Ok(probs[j].0)
    }

    fn solve_components(&self, active: &[usize], seed: u64) -> Result<(Vec<(usize, usize)>, RoundMeter)> {
        let parts = self.components(active);
        let solved: Vec<_> = if parts.len() > 1 {
            parts.par_iter().map(|c| self.solve(c, seed)).collect::<Result<_>>()?
        } else {
            parts.iter().map(|c| self.solve(c, seed)).collect::<Result<_>>()?
        };
        let mut meter = RoundMeter::default();
        let mut matching = Vec::new();
        for (m, part_meter) in solved {
            matching.extend(m);
            meter.merge_parallel(&part_meter);
        }
        Ok((matching, meter))
    }

    fn solve(&self, component: &[usize], seed: u64) -> Result<(Vec<(usize, usize)>, RoundMeter)> {
        let key = set_key(component);
        let sep = find_separator_in(self.graph(), component);
        let mut rest = component.to_vec();
        let mut meter = RoundMeter::default();
        let mut matching = Vec::new();
        for (j, &s) in sep.separator.iter().enumerate() {
            if !rest.contains(&s) {
                continue;
            }
            let mut rng = stream(seed, &[tag::SUBPROBLEM, key, tag::STEP, j as u64]);
            let u = self.match_vertex(s, &rest, &mut rng, &mut meter)?;
            matching.push((s.min(u), s.max(u)));
            rest.retain(|&x| x != u && x != s);
        }
        let (below, below_meter) = self.solve_components(&rest, seed)?;
        matching.extend(below);
        meter.merge_sequential(&below_meter);
        Ok((matching, meter))
    }

    /// Connected components of the subgraph induced by sorted `active`.
    fn components(&self, active: &[usize]) -> Vec<Vec<usize>> {
        let g = self.graph();
        let mut state = vec![0u8; g.n()];
        for &v in active {
            state[v] = 1;
        }
        let mut out = Vec::new();
        for &s in active {
            if state[s] != 1 {
                continue;
            }
            state[s] = 2;
            let mut part = vec![s];
            let mut head = 0;
            while head < part.len() {
                let v = part[head];
                head += 1;
                for &w in g.neighbors(v) {
                    if state[w] == 1 {
                        state[w] = 2;
                        part.push(w);
                    }
                }
            }
            part.sort_unstable();
            out.push(part);
        }
        out
    }
}

/// Uniform perfect matching of `g` by separator recursion.
pub fn sample_matching(g: &PlanarGraph, seed: u64) -> Result<MatchingSample> {
    PlanarSampler::new(g)?.sample(seed)
}

/// Uniform perfect matching of `g`, one vertex matched per round.
pub fn sequential_matching(g: &PlanarGraph, seed: u64) -> Result<MatchingSample> {
    PlanarSampler::new(g)?.sample_sequential(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_takes_one_round() {
        let s = sample_matching(&PlanarGraph::path(2).unwrap(), 3).unwrap();
        assert_eq!(s.matching, vec![(0, 1)]);
        assert_eq!(s.meter.adaptive_rounds, 1);
    }

    #[test]
    fn errors() {
        assert_eq!(sample_matching(&PlanarGraph::path(3).unwrap(), 0).unwrap_err(), Error::OddVertexCount);
        let star = PlanarGraph::new(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(sample_matching(&star, 0).unwrap_err(), Error::NoPerfectMatching);
    }

    #[test]
    fn samples_are_perfect_and_reproducible() {
        let g = PlanarGraph::grid(6, 6).unwrap();
        let sampler = PlanarSampler::new(&g).unwrap();
        for seed in 0..20 {
            let a = sampler.sample(seed).unwrap();
            assert!(a.is_perfect_for(&g));
            assert_eq!(a, sampler.sample(seed).unwrap());
            let b = sampler.sample_sequential(seed).unwrap();
            assert!(b.is_perfect_for(&g));
            assert_eq!(b.meter.adaptive_rounds, 18);
        }
    }
}
