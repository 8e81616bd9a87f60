use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::PlanarGraph;

/// Vertex separator: no edge joins `side_a` and `side_b`, each holding at
/// most two thirds of the vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separator {
    pub separator: Vec<usize>,
    pub side_a: Vec<usize>,
    pub side_b: Vec<usize>,
}

impl Separator {
    /// Checks the separation predicate against `g` restricted to the union.
    pub fn separates(&self, g: &PlanarGraph) -> bool {
        let n = self.separator.len() + self.side_a.len() + self.side_b.len();
        let mut in_b = vec![false; g.n()];
        for &v in &self.side_b {
            in_b[v] = true;
        }
        let crossing = self.side_a.iter().any(|&v| g.neighbors(v).iter().any(|&w| in_b[w]));
        !crossing && 3 * self.side_a.len().max(self.side_b.len()) <= 2 * n
    }
}

const MAX_ROOTS: usize = 64;

/// Separator of the whole graph.
pub fn find_separator(g: &PlanarGraph) -> Separator {
    let all: Vec<usize> = (0..g.n()).collect();
    find_separator_in(g, &all)
}

/// Separator of the subgraph induced by `active`. Candidates are BFS
/// prefixes and BFS levels from up to 64 roots; the smallest separator
/// wins, ties broken by the larger side.
pub fn find_separator_in(g: &PlanarGraph, active: &[usize]) -> Separator {
    let n = active.len();
    if n <= 1 {
        return Separator { separator: active.to_vec(), side_a: Vec::new(), side_b: Vec::new() };
    }
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in active.iter().enumerate() {
        local[v] = i;
    }
    let adj: Vec<Vec<usize>> = active
        .iter()
        .map(|&v| g.neighbors(v).iter().filter_map(|&w| (local[w] != usize::MAX).then_some(local[w])).collect())
        .collect();
    let lo = n.div_ceil(3).max(1);
    let hi = (2 * n / 3).max(lo);
    let stride = n.div_ceil(MAX_ROOTS);

    // (|S|, larger side, root, kind, cut)
    let mut best: Option<(usize, usize, usize, u8, usize)> = None;
    let mut consider = |cand: (usize, usize, usize, u8, usize)| {
        if best.is_none_or(|b| (cand.0, cand.1) < (b.0, b.1)) {
            best = Some(cand);
        }
    };
    for root in (0..n).step_by(stride) {
        let (order, level) = bfs(&adj, root);
        let mut outside: Vec<usize> = adj.iter().map(Vec::len).collect();
        let mut in_a = vec![false; n];
        let mut boundary = 0usize;
        for (m, &x) in order.iter().enumerate().take(hi) {
            in_a[x] = true;
            outside[x] = adj[x].iter().filter(|&&y| !in_a[y]).count();
            if outside[x] > 0 {
                boundary += 1;
            }
            for &y in &adj[x] {
                if in_a[y] && y != x {
                    outside[y] -= 1;
                    if outside[y] == 0 {
                        boundary -= 1;
                    }
                }
            }
            let size = m + 1;
            if size >= lo {
                consider((boundary, (size - boundary).max(n - size), root, 0, size));
            }
        }
        let depth = level.iter().copied().max().unwrap_or(0);
        let mut per_level = vec![0usize; depth + 1];
        for &l in &level {
            per_level[l] += 1;
        }
        let mut below = 0;
        for (i, &width) in per_level.iter().enumerate() {
            let above = n - below - width;
            if 3 * below.max(above) <= 2 * n {
                consider((width, below.max(above), root, 1, i));
            }
            below += width;
        }
    }
    let (_, _, root, kind, cut) = best.expect("a BFS prefix of size ⌈n/3⌉ is always balanced");
    let (order, level) = bfs(&adj, root);
    let (mut s, mut a, mut b) = (Vec::new(), Vec::new(), Vec::new());
    if kind == 0 {
        let mut in_a = vec![false; n];
        for &x in &order[..cut] {
            in_a[x] = true;
        }
        for x in 0..n {
            if !in_a[x] {
                b.push(active[x]);
            } else if adj[x].iter().any(|&y| !in_a[y]) {
                s.push(active[x]);
            } else {
                a.push(active[x]);
            }
        }
    } else {
        for x in 0..n {
            match level[x].cmp(&cut) {
                std::cmp::Ordering::Less => a.push(active[x]),
                std::cmp::Ordering::Equal => s.push(active[x]),
                std::cmp::Ordering::Greater => b.push(active[x]),
            }
        }
    }
    s.sort_unstable();
    a.sort_unstable();
    b.sort_unstable();
    Separator { separator: s, side_a: a, side_b: b }
}

/// BFS order over every component, starting at `root`, with levels; later
/// components continue the level count so each stays on one side of a cut.
fn bfs(adj: &[Vec<usize>], root: usize) -> (Vec<usize>, Vec<usize>) {
    let n = adj.len();
    let mut level = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let starts = std::iter::once(root).chain((0..n).filter(move |&v| v != root));
    let mut offset = 0;
    for s in starts {
        if level[s] != usize::MAX {
            continue;
        }
        level[s] = offset;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &adj[v] {
                if level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        offset = order.iter().map(|&v| level[v]).max().unwrap_or(0) + 1;
    }
    (order, level)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_of_three_splits_at_middle() {
        let s = find_separator(&PlanarGraph::path(3).unwrap());
        assert_eq!(s.separator, vec![1]);
        assert_eq!((s.side_a.len(), s.side_b.len()), (1, 1));
    }

    #[test]
    fn grid_cut_is_small_and_balanced() {
        let g = PlanarGraph::grid(4, 4).unwrap();
        let s = find_separator(&g);
        assert!(s.separates(&g));
        assert!(s.separator.len() <= 4);
        let sizes = s.separator.len() + s.side_a.len() + s.side_b.len();
        assert_eq!(sizes, 16);
    }

    #[test]
    fn single_edge() {
        let s = find_separator(&PlanarGraph::path(2).unwrap());
        assert_eq!(s.separator.len(), 1);
        assert!(s.separates(&PlanarGraph::path(2).unwrap()));
    }

    #[test]
    fn disconnected_and_restricted() {
        let g = PlanarGraph::new(6, &[(0, 1), (2, 3), (4, 5)]).unwrap();
        let s = find_separator(&g);
        assert!(s.separates(&g));
        let sub = find_separator_in(&PlanarGraph::grid(5, 5).unwrap(), &[0, 1, 2, 5, 6, 7]);
        assert_eq!(sub.separator.len() + sub.side_a.len() + sub.side_b.len(), 6);
    }
}
