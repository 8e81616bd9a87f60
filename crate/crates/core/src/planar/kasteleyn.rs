use std::collections::{HashMap, VecDeque};

use nalgebra::DMatrix;

use super::PlanarGraph;
use crate::error::{Error, Result};
use crate::numerics::{det, log_abs_det, principal_submatrix};

/// Pfaffian orientation of a planar graph: every face but one per component
/// has an odd number of edges oriented along its boundary walk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KasteleynOrientation {
    /// `forward[i]` orients `edges()[i] = (u, v)` as `u → v`.
    pub forward: Vec<bool>,
}

impl KasteleynOrientation {
    /// Spanning forest oriented arbitrarily, then each remaining edge fixed
    /// by the face it closes, leaves of the dual tree first.
    pub fn new(g: &PlanarGraph) -> Self {
        let m = g.edges().len();
        let mut tree = vec![false; m];
        let mut seen = vec![false; g.n()];
        for s in 0..g.n() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &w in g.neighbors(v) {
                    if !seen[w] {
                        seen[w] = true;
                        tree[g.edge_index(v, w).expect("edge exists")] = true;
                        queue.push_back(w);
                    }
                }
            }
        }

        let faces = g.faces();
        let face_of: HashMap<(usize, usize), usize> =
            faces.iter().enumerate().flat_map(|(f, walk)| walk.iter().map(move |&h| (h, f))).collect();
        let mut dual: Vec<Vec<(usize, usize)>> = vec![Vec::new(); faces.len()];
        for (i, &(u, v)) in g.edges().iter().enumerate() {
            if !tree[i] {
                let (a, b) = (face_of[&(u, v)], face_of[&(v, u)]);
                dual[a].push((b, i));
                dual[b].push((a, i));
            }
        }

        let mut forward: Vec<Option<bool>> = tree.iter().map(|&t| t.then_some(true)).collect();
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; faces.len()];
        let mut visited = vec![false; faces.len()];
        for root in 0..faces.len() {
            if visited[root] {
                continue;
            }
            visited[root] = true;
            let mut order = vec![root];
            let mut head = 0;
            while head < order.len() {
                let f = order[head];
                head += 1;
                for &(h, e) in &dual[f] {
                    if !visited[h] {
                        visited[h] = true;
                        parent[h] = Some((f, e));
                        order.push(h);
                    }
                }
            }
            for &f in order.iter().skip(1).rev() {
                let (_, e) = parent[f].expect("non-root face has a dual parent");
                let mut along = 0usize;
                let mut free_direction = None;
                for &(a, b) in &faces[f] {
                    let i = g.edge_index(a, b).expect("edge exists");
                    let lower_first = a < b;
                    if i == e {
                        free_direction = Some(lower_first);
                    } else {
                        let dir = forward[i].expect("inner edges of a dual leaf are oriented");
                        if dir == lower_first {
                            along += 1;
                        }
                    }
                }
                let walk_dir = free_direction.expect("dual parent edge lies on the face");
                forward[e] = Some(if along.is_multiple_of(2) { walk_dir } else { !walk_dir });
            }
        }
        Self { forward: forward.into_iter().map(|d| d.expect("every edge oriented")).collect() }
    }

    /// Number of faces with an even count of edges oriented along the walk.
    pub fn even_faces(&self, g: &PlanarGraph) -> usize {
        g.faces()
            .iter()
            .filter(|walk| {
                let along = walk
                    .iter()
                    .filter(|&&(a, b)| self.forward[g.edge_index(a, b).expect("edge exists")] == (a < b))
                    .count();
                along % 2 == 0
            })
            .count()
    }

    /// Skew-symmetric `±1` adjacency matrix.
    pub fn signed_adjacency(&self, g: &PlanarGraph) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(g.n(), g.n());
        for (i, &(u, v)) in g.edges().iter().enumerate() {
            let s = if self.forward[i] { 1.0 } else { -1.0 };
            a[(u, v)] = s;
            a[(v, u)] = -s;
        }
        a
    }
}

/// Matching counts of vertex-induced subgraphs obtained by deleting matched
/// pairs, read off principal minors of one signed adjacency matrix.
#[derive(Clone, Debug)]
pub struct MatchingCounter {
    graph: PlanarGraph,
    signed: DMatrix<f64>,
}

impl MatchingCounter {
    pub fn new(graph: &PlanarGraph) -> Self {
        let signed = KasteleynOrientation::new(graph).signed_adjacency(graph);
        Self { graph: graph.clone(), signed }
    }

    pub fn graph(&self) -> &PlanarGraph {
        &self.graph
    }

    /// `ln #PM` of the subgraph induced by `active`, `None` when it has no
    /// perfect matching.
    pub fn ln_count(&self, active: &[usize]) -> Option<f64> {
        if active.is_empty() {
            return Some(0.0);
        }
        if active.len() % 2 == 1 {
            return None;
        }
        let (sign, ln_det) = log_abs_det(&principal_submatrix(&self.signed, active));
        (sign != 0.0 && ln_det > 0.5f64.ln()).then_some(0.5 * ln_det)
    }

    /// Exact count for `active`; errors once `√|det|` is not within 0.25 of
    /// an integer or exceeds the range where `f64` holds integers exactly.
    pub fn count(&self, active: &[usize]) -> Result<f64> {
        if active.len() % 2 == 1 {
            return Err(Error::OddVertexCount);
        }
        let root = det(&principal_submatrix(&self.signed, active)).abs().sqrt();
        let rounded = root.round();
        let residual = (root - rounded).abs();
        if residual > 0.25 || rounded > 2f64.powi(53) {
            return Err(Error::IllConditioned { residual });
        }
        Ok(rounded)
    }

    /// Probability that a uniform perfect matching of the subgraph induced by
    /// `active` uses edge `(v, u)`, for every neighbour `u` of `v` in it.
    pub fn edge_marginal(&self, v: usize, active: &[usize]) -> Result<Vec<(usize, f64)>> {
        if !active.contains(&v) {
            return Err(Error::InvalidArgument(format!("vertex {v} is already matched")));
        }
        if active.len() % 2 == 1 {
            return Err(Error::OddVertexCount);
        }
        let total = self.ln_count(active).ok_or(Error::NoPerfectMatching)?;
        let mut out = Vec::new();
        let mut sum = 0.0;
        for &u in self.graph.neighbors(v) {
            if !active.contains(&u) {
                continue;
            }
            let rest: Vec<usize> = active.iter().copied().filter(|&x| x != u && x != v).collect();
            let p = self.ln_count(&rest).map_or(0.0, |c| (c - total).exp());
            sum += p;
            out.push((u, p));
        }
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::IllConditioned { residual: (sum - 1.0).abs() });
        }
        Ok(out)
    }
}

/// Number of perfect matchings.
pub fn count_matchings(g: &PlanarGraph) -> Result<f64> {
    if g.n() % 2 == 1 {
        return Err(Error::OddVertexCount);
    }
    let all: Vec<usize> = (0..g.n()).collect();
    MatchingCounter::new(g).count(&all)
}

/// Distribution of the partner of `v` in a uniform perfect matching that
/// extends `conditioned`, over the edges `(v, u)` still available.
pub fn edge_marginal(g: &PlanarGraph, v: usize, conditioned: &[(usize, usize)]) -> Result<Vec<((usize, usize), f64)>> {
    if g.n() % 2 == 1 {
        return Err(Error::OddVertexCount);
    }
    let mut matched = vec![false; g.n()];
    for &(a, b) in conditioned {
        if g.edge_index(a, b).is_none() || matched[a] || matched[b] {
            return Err(Error::InvalidArgument(format!("({a}, {b}) does not extend a matching")));
        }
        matched[a] = true;
        matched[b] = true;
    }
    let active: Vec<usize> = (0..g.n()).filter(|&x| !matched[x]).collect();
    let out = MatchingCounter::new(g).edge_marginal(v, &active)?;
    Ok(out.into_iter().map(|(u, p)| ((v, u), p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validation::enumerate_perfect_matchings;

    #[test]
    fn counts_of_small_graphs() {
        assert_eq!(count_matchings(&PlanarGraph::path(2).unwrap()).unwrap(), 1.0);
        assert_eq!(count_matchings(&PlanarGraph::cycle(4).unwrap()).unwrap(), 2.0);
        assert_eq!(count_matchings(&PlanarGraph::grid(3, 2).unwrap()).unwrap(), 3.0);
        assert_eq!(count_matchings(&PlanarGraph::grid(4, 4).unwrap()).unwrap(), 36.0);
        assert_eq!(count_matchings(&PlanarGraph::cycle(5).unwrap()), Err(Error::OddVertexCount));
        assert_eq!(count_matchings(&PlanarGraph::new(4, &[(0, 1)]).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn orientation_is_kasteleyn() {
        for g in [PlanarGraph::grid(4, 4).unwrap(), PlanarGraph::grid(5, 3).unwrap(), PlanarGraph::cycle(7).unwrap()] {
            let o = KasteleynOrientation::new(&g);
            let comps = g.components().into_iter().max().map_or(0, |c| c + 1);
            assert!(o.even_faces(&g) <= comps);
        }
    }

    #[test]
    fn marginals_of_examples() {
        let c4 = PlanarGraph::cycle(4).unwrap();
        for v in 0..4 {
            let p = edge_marginal(&c4, v, &[]).unwrap();
            assert!(p.iter().all(|&(_, x)| (x - 0.5).abs() < 1e-12));
        }
        let path = PlanarGraph::path(4).unwrap();
        let p = edge_marginal(&path, 1, &[]).unwrap();
        assert_eq!(p.len(), 2);
        for ((_, u), x) in p {
            assert!((x - if u == 0 { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
        let g = PlanarGraph::grid(3, 2).unwrap();
        let p: HashMap<usize, f64> = edge_marginal(&g, 0, &[]).unwrap().into_iter().map(|((_, u), x)| (u, x)).collect();
        let total = enumerate_perfect_matchings(6, g.edges()).len() as f64;
        let uses = |u: usize| {
            enumerate_perfect_matchings(6, g.edges()).iter().filter(|m| m.contains(&(0, u))).count() as f64 / total
        };
        assert!((p[&3] - 2.0 / 3.0).abs() < 1e-12 && (p[&3] - uses(3)).abs() < 1e-12);
        assert!((p[&1] - 1.0 / 3.0).abs() < 1e-12 && (p[&1] - uses(1)).abs() < 1e-12);
    }

    #[test]
    fn conditioned_marginal() {
        let g = PlanarGraph::grid(4, 2).unwrap();
        let p = edge_marginal(&g, 1, &[(0, 4)]).unwrap();
        let sum: f64 = p.iter().map(|x| x.1).sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert_eq!(edge_marginal(&g, 0, &[(0, 4)]).unwrap_err(), Error::InvalidArgument("vertex 0 is already matched".into()));
        let path = PlanarGraph::path(4).unwrap();
        assert_eq!(edge_marginal(&path, 0, &[(1, 2)]).unwrap_err(), Error::NoPerfectMatching);
    }
}
