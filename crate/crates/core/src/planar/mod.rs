//! Uniform perfect matchings of planar graphs: Pfaffian counting through a
//! Kasteleyn orientation and a separator recursion that matches separator
//! vertices one round at a time.

mod kasteleyn;
mod lr;
mod sampler;
mod separator;

use std::collections::HashMap;

use crate::error::{Error, Result};

pub use kasteleyn::{count_matchings, edge_marginal, KasteleynOrientation, MatchingCounter};
pub use sampler::{sample_matching, sequential_matching, MatchingSample, PlanarSampler};
pub use separator::{find_separator, find_separator_in, Separator};

/// A simple undirected graph with a planar rotation system.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    rotation: Vec<Vec<usize>>,
}

impl PlanarGraph {
    /// Builds the graph and computes a planar embedding.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let (edges, adjacency) = normalize(n, edges)?;
        let rotation = lr::planar_embedding(&adjacency).ok_or(Error::NotPlanar)?;
        let g = Self { n, edges, adjacency, rotation };
        if !g.satisfies_euler() {
            return Err(Error::NotPlanar);
        }
        Ok(g)
    }

    /// Builds the graph with a caller-supplied rotation system (clockwise
    /// neighbour order per vertex), rejected unless it satisfies Euler's
    /// formula on every component.
    pub fn with_rotation(n: usize, edges: &[(usize, usize)], rotation: Vec<Vec<usize>>) -> Result<Self> {
        let (edges, adjacency) = normalize(n, edges)?;
        if rotation.len() != n {
            return Err(Error::InvalidArgument(format!("rotation lists {} vertices, expected {n}", rotation.len())));
        }
        for (v, order) in rotation.iter().enumerate() {
            let mut a = order.clone();
            a.sort_unstable();
            let mut b = adjacency[v].clone();
            b.sort_unstable();
            if a != b {
                return Err(Error::InvalidArgument(format!("rotation at vertex {v} is not a permutation of its neighbours")));
            }
        }
        let g = Self { n, edges, adjacency, rotation };
        if !g.satisfies_euler() {
            return Err(Error::NotPlanar);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Clockwise cyclic neighbour order at `v`.
    pub fn rotation(&self, v: usize) -> &[usize] {
        &self.rotation[v]
    }

    pub fn rotation_system(&self) -> &[Vec<usize>] {
        &self.rotation
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let e = (u.min(v), u.max(v));
        self.edges.binary_search(&e).ok()
    }

    /// Faces as closed walks of half-edges `(u, v)`; every half-edge lies on
    /// exactly one face.
    pub fn faces(&self) -> Vec<Vec<(usize, usize)>> {
        let pos: HashMap<(usize, usize), usize> = self
            .rotation
            .iter()
            .enumerate()
            .flat_map(|(v, order)| order.iter().enumerate().map(move |(i, &w)| ((v, w), i)))
            .collect();
        let mut seen = HashMap::with_capacity(pos.len());
        let mut faces = Vec::new();
        for v in 0..self.n {
            for &w in &self.rotation[v] {
                if seen.contains_key(&(v, w)) {
                    continue;
                }
                let mut face = Vec::new();
                let (mut a, mut b) = (v, w);
                while seen.insert((a, b), faces.len()).is_none() {
                    face.push((a, b));
                    let order = &self.rotation[b];
                    let i = pos[&(b, a)];
                    let next = order[(i + order.len() - 1) % order.len()];
                    (a, b) = (b, next);
                }
                faces.push(face);
            }
        }
        faces
    }

    /// Connected component label of every vertex, labels in order of first
    /// appearance.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &w in &self.adjacency[v] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// `V − E + F = 2` on every component with at least one edge.
    pub fn satisfies_euler(&self) -> bool {
        let label = self.components();
        let comps = label.iter().copied().max().map_or(0, |m| m + 1);
        let mut v = vec![0i64; comps];
        let mut e = vec![0i64; comps];
        let mut f = vec![0i64; comps];
        for x in 0..self.n {
            v[label[x]] += 1;
        }
        for &(a, _) in &self.edges {
            e[label[a]] += 1;
        }
        for face in self.faces() {
            f[label[face[0].0]] += 1;
        }
        (0..comps).all(|c| e[c] == 0 || v[c] - e[c] + f[c] == 2)
    }

    /// `w × h` grid, vertex `(x, y)` at index `y·w + x`.
    pub fn grid(w: usize, h: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let v = y * w + x;
                if x + 1 < w {
                    edges.push((v, v + 1));
                }
                if y + 1 < h {
                    edges.push((v, v + w));
                }
            }
        }
        Self::new(w * h, &edges)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::new(n, &edges)
    }

    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges)
    }

    /// Line 1 `n m`, then `m` lines `u v`, then an optional `# rotation`
    /// section with lines `v a b c ...` giving the clockwise order at `v`.
    pub fn parse(text: &str) -> Result<Self> {
        let parse_err = |msg: String| Error::Parse(msg);
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| parse_err("empty graph file".into()))?;
        let nums = parse_numbers(header)?;
        let [n, m] = nums[..] else {
            return Err(parse_err(format!("header must be 'n m', got '{header}'")));
        };
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let line = lines.next().ok_or_else(|| parse_err(format!("expected {m} edge lines")))?;
            match parse_numbers(line)?[..] {
                [u, v] => edges.push((u, v)),
                _ => return Err(parse_err(format!("edge line must be 'u v', got '{line}'"))),
            }
        }
        let rest: Vec<&str> = lines.collect();
        if rest.is_empty() {
            return Self::new(n, &edges);
        }
        if !rest[0].starts_with('#') || !rest[0][1..].trim().eq_ignore_ascii_case("rotation") {
            return Err(parse_err(format!("unexpected line '{}'", rest[0])));
        }
        let mut rotation = vec![None; n];
        for line in &rest[1..] {
            let nums = parse_numbers(line)?;
            let (&v, order) = nums.split_first().ok_or_else(|| parse_err("empty rotation line".into()))?;
            if v >= n {
                return Err(parse_err(format!("rotation vertex {v} out of range")));
            }
            if rotation[v].replace(order.to_vec()).is_some() {
                return Err(parse_err(format!("rotation for vertex {v} given twice")));
            }
        }
        let rotation: Vec<Vec<usize>> = rotation.into_iter().map(Option::unwrap_or_default).collect();
        Self::with_rotation(n, &edges, rotation)
    }

    /// Inverse of [`PlanarGraph::parse`], including the rotation section.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            s.push_str(&format!("{u} {v}\n"));
        }
        s.push_str("# rotation\n");
        for (v, order) in self.rotation.iter().enumerate() {
            if order.is_empty() {
                continue;
            }
            let rest: Vec<String> = order.iter().map(ToString::to_string).collect();
            s.push_str(&format!("{v} {}\n", rest.join(" ")));
        }
        s
    }
}

fn parse_numbers(line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("'{t}' is not a vertex id or count"))))
        .collect()
}

type EdgeLists = (Vec<(usize, usize)>, Vec<Vec<usize>>);

fn normalize(n: usize, edges: &[(usize, usize)]) -> Result<EdgeLists> {
    let mut out: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
    for &(u, v) in edges {
        if u >= n || v >= n {
            return Err(Error::InvalidArgument(format!("edge ({u}, {v}) out of range for n = {n}")));
        }
        if u == v {
            return Err(Error::InvalidArgument(format!("self-loop at {u}")));
        }
        out.push((u.min(v), u.max(v)));
    }
    out.sort_unstable();
    if out.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("repeated edge".into()));
    }
    let mut adjacency = vec![Vec::new(); n];
    for &(u, v) in &out {
        adjacency[u].push(v);
        adjacency[v].push(u);
    }
    Ok((out, adjacency))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Vec<(usize, usize)> {
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
    }

    #[test]
    fn small_planar_graphs_embed() {
        for g in [PlanarGraph::grid(4, 4), PlanarGraph::cycle(5), PlanarGraph::path(3), PlanarGraph::new(4, &complete(4))] {
            assert!(g.unwrap().satisfies_euler());
        }
    }

    #[test]
    fn kuratowski_graphs_are_rejected() {
        assert_eq!(PlanarGraph::new(5, &complete(5)), Err(Error::NotPlanar));
        let k33: Vec<_> = (0..3).flat_map(|i| (3..6).map(move |j| (i, j))).collect();
        assert_eq!(PlanarGraph::new(6, &k33), Err(Error::NotPlanar));
        let mut petersen: Vec<_> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        petersen.extend((0..5).map(|i| (i, i + 5)));
        petersen.extend((0..5).map(|i| (5 + i, 5 + (i + 2) % 5)));
        assert_eq!(PlanarGraph::new(10, &petersen), Err(Error::NotPlanar));
    }

    #[test]
    fn wrong_rotation_is_rejected() {
        // K4 with a rotation that is not planar: two faces too few.
        let edges = complete(4);
        let bad = vec![vec![1, 2, 3], vec![0, 2, 3], vec![0, 1, 3], vec![0, 1, 2]];
        let good = PlanarGraph::new(4, &edges).unwrap().rotation_system().to_vec();
        assert!(PlanarGraph::with_rotation(4, &edges, good).is_ok());
        assert_eq!(PlanarGraph::with_rotation(4, &edges, bad), Err(Error::NotPlanar));
    }

    #[test]
    fn text_round_trip() {
        let g = PlanarGraph::grid(3, 2).unwrap();
        let back = PlanarGraph::parse(&g.to_text()).unwrap();
        assert_eq!(back, g);
        let plain = PlanarGraph::parse("4 4\n0 1\n1 2\n2 3\n3 0\n").unwrap();
        assert_eq!(plain.edges().len(), 4);
        assert!(PlanarGraph::parse("3 1\n0 0\n").is_err());
        assert!(PlanarGraph::parse("2 2\n0 1\n").is_err());
    }
}
