//! Left-right planarity test with embedding construction.
//!
//! Orientation DFS computes lowpoints and a nesting order, testing DFS
//! maintains a stack of conflict pairs of return-edge intervals, and the
//! embedding DFS places back edges on the side their sign dictates.

use std::collections::{HashMap, HashSet};

type Edge = (usize, usize);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Interval {
    low: Option<Edge>,
    high: Option<Edge>,
}

impl Interval {
    fn single(e: Edge) -> Self {
        Self { low: Some(e), high: Some(e) }
    }

    fn is_empty(&self) -> bool {
        self.low.is_none() && self.high.is_none()
    }
}

#[derive(Clone, Copy, Debug)]
struct ConflictPair {
    id: usize,
    left: Interval,
    right: Interval,
}

impl ConflictPair {
    fn swap(&mut self) {
        std::mem::swap(&mut self.left, &mut self.right);
    }
}

/// Cyclic clockwise neighbour orders under construction.
#[derive(Clone, Debug, Default)]
pub(crate) struct Rotation {
    pub cw: Vec<Vec<usize>>,
    first: Vec<Option<usize>>,
}

impl Rotation {
    fn new(n: usize) -> Self {
        Self { cw: vec![Vec::new(); n], first: vec![None; n] }
    }

    fn pos(&self, v: usize, w: usize) -> usize {
        self.cw[v].iter().position(|&x| x == w).expect("reference half-edge missing")
    }

    fn add_cw(&mut self, v: usize, w: usize, reference: Option<usize>) {
        match reference {
            None => {
                self.cw[v].push(w);
                self.first[v] = Some(w);
            }
            Some(r) => {
                let p = self.pos(v, r);
                self.cw[v].insert(p + 1, w);
            }
        }
    }

    fn add_ccw(&mut self, v: usize, w: usize, reference: Option<usize>) {
        match reference {
            None => {
                self.cw[v].push(w);
                self.first[v] = Some(w);
            }
            Some(r) => {
                let p = self.pos(v, r);
                self.cw[v].insert(p, w);
                if self.first[v] == Some(r) {
                    self.first[v] = Some(w);
                }
            }
        }
    }

    fn add_first(&mut self, v: usize, w: usize) {
        let reference = self.first[v];
        self.add_ccw(v, w, reference);
    }
}

struct LrState<'a> {
    adj: &'a [Vec<usize>],
    height: Vec<Option<usize>>,
    roots: Vec<usize>,
    lowpt: HashMap<Edge, usize>,
    lowpt2: HashMap<Edge, usize>,
    nesting_depth: HashMap<Edge, i64>,
    parent_edge: Vec<Option<Edge>>,
    oriented: HashSet<Edge>,
    out: Vec<Vec<usize>>,
    ordered: Vec<Vec<usize>>,
    refs: HashMap<Edge, Edge>,
    side: HashMap<Edge, i64>,
    stack: Vec<ConflictPair>,
    next_id: usize,
    stack_bottom: HashMap<Edge, Option<usize>>,
    lowpt_edge: HashMap<Edge, Edge>,
    left_ref: Vec<usize>,
    right_ref: Vec<usize>,
    rotation: Rotation,
}

impl<'a> LrState<'a> {
    fn new(adj: &'a [Vec<usize>]) -> Self {
        let n = adj.len();
        Self {
            adj,
            height: vec![None; n],
            roots: Vec::new(),
            lowpt: HashMap::new(),
            lowpt2: HashMap::new(),
            nesting_depth: HashMap::new(),
            parent_edge: vec![None; n],
            oriented: HashSet::new(),
            out: vec![Vec::new(); n],
            ordered: vec![Vec::new(); n],
            refs: HashMap::new(),
            side: HashMap::new(),
            stack: Vec::new(),
            next_id: 0,
            stack_bottom: HashMap::new(),
            lowpt_edge: HashMap::new(),
            left_ref: vec![usize::MAX; n],
            right_ref: vec![usize::MAX; n],
            rotation: Rotation::new(n),
        }
    }

    fn pair(&mut self, left: Interval, right: Interval) -> ConflictPair {
        self.next_id += 1;
        ConflictPair { id: self.next_id, left, right }
    }

    fn top_id(&self) -> Option<usize> {
        self.stack.last().map(|p| p.id)
    }

    fn conflicting(&self, i: &Interval, b: Edge) -> bool {
        !i.is_empty() && self.lowpt[&i.high.expect("nonempty interval has a high edge")] > self.lowpt[&b]
    }

    fn lowest(&self, p: &ConflictPair) -> usize {
        let low = |i: &Interval| self.lowpt[&i.low.expect("nonempty interval has a low edge")];
        if p.left.is_empty() {
            low(&p.right)
        } else if p.right.is_empty() {
            low(&p.left)
        } else {
            low(&p.left).min(low(&p.right))
        }
    }

    fn dfs_orientation(&mut self, v: usize) {
        let e = self.parent_edge[v];
        for idx in 0..self.adj[v].len() {
            let w = self.adj[v][idx];
            if self.oriented.contains(&(v, w)) || self.oriented.contains(&(w, v)) {
                continue;
            }
            let vw = (v, w);
            self.oriented.insert(vw);
            self.out[v].push(w);
            let hv = self.height[v].expect("visited");
            self.lowpt.insert(vw, hv);
            self.lowpt2.insert(vw, hv);
            match self.height[w] {
                None => {
                    self.parent_edge[w] = Some(vw);
                    self.height[w] = Some(hv + 1);
                    self.dfs_orientation(w);
                }
                Some(hw) => {
                    self.lowpt.insert(vw, hw);
                }
            }
            let lp = self.lowpt[&vw];
            let lp2 = self.lowpt2[&vw];
            let mut depth = 2 * lp as i64;
            if lp2 < hv {
                depth += 1;
            }
            self.nesting_depth.insert(vw, depth);
            if let Some(e) = e {
                let (le, le2) = (self.lowpt[&e], self.lowpt2[&e]);
                if lp < le {
                    self.lowpt2.insert(e, le.min(lp2));
                    self.lowpt.insert(e, lp);
                } else if lp > le {
                    self.lowpt2.insert(e, le2.min(lp));
                } else {
                    self.lowpt2.insert(e, le2.min(lp2));
                }
            }
        }
    }

    fn dfs_testing(&mut self, v: usize) -> bool {
        let e = self.parent_edge[v];
        for idx in 0..self.ordered[v].len() {
            let w = self.ordered[v][idx];
            let ei = (v, w);
            let bottom = self.top_id();
            self.stack_bottom.insert(ei, bottom);
            if Some(ei) == self.parent_edge[w] {
                if !self.dfs_testing(w) {
                    return false;
                }
            } else {
                self.lowpt_edge.insert(ei, ei);
                let p = self.pair(Interval::default(), Interval::single(ei));
                self.stack.push(p);
            }
            if self.lowpt[&ei] < self.height[v].expect("visited") {
                let e = e.expect("an edge with a return edge has a parent");
                if idx == 0 {
                    let le = self.lowpt_edge[&ei];
                    self.lowpt_edge.insert(e, le);
                } else if !self.add_constraints(ei, e) {
                    return false;
                }
            }
        }
        if let Some(e) = e {
            self.remove_back_edges(e);
        }
        true
    }

    fn add_constraints(&mut self, ei: Edge, e: Edge) -> bool {
        let mut p = self.pair(Interval::default(), Interval::default());
        loop {
            let mut q = self.stack.pop().expect("return edges of e_i are on the stack");
            if !q.left.is_empty() {
                q.swap();
            }
            if !q.left.is_empty() {
                return false;
            }
            let q_right_low = q.right.low.expect("nonempty");
            if self.lowpt[&q_right_low] > self.lowpt[&e] {
                if p.right.is_empty() {
                    p.right = q.right;
                } else {
                    self.refs.insert(p.right.low.expect("nonempty"), q.right.high.expect("nonempty"));
                }
                p.right.low = q.right.low;
            } else {
                let le = self.lowpt_edge[&e];
                self.refs.insert(q_right_low, le);
            }
            if self.top_id() == self.stack_bottom[&ei] {
                break;
            }
        }
        while let Some(top) = self.stack.last() {
            if !(self.conflicting(&top.left, ei) || self.conflicting(&top.right, ei)) {
                break;
            }
            let mut q = self.stack.pop().expect("checked");
            if self.conflicting(&q.right, ei) {
                q.swap();
            }
            if self.conflicting(&q.right, ei) {
                return false;
            }
            if let (Some(low), Some(high)) = (p.right.low, q.right.high) {
                self.refs.insert(low, high);
            }
            if q.right.low.is_some() {
                p.right.low = q.right.low;
            }
            if p.left.is_empty() {
                p.left = q.left;
            } else if let (Some(low), Some(high)) = (p.left.low, q.left.high) {
                self.refs.insert(low, high);
            }
            p.left.low = q.left.low;
        }
        if !(p.left.is_empty() && p.right.is_empty()) {
            self.stack.push(p);
        }
        true
    }

    fn remove_back_edges(&mut self, e: Edge) {
        let u = e.0;
        let hu = self.height[u].expect("visited");
        while let Some(top) = self.stack.last() {
            if self.lowest(top) != hu {
                break;
            }
            let p = self.stack.pop().expect("checked");
            if let Some(low) = p.left.low {
                self.side.insert(low, -1);
            }
        }
        if let Some(mut p) = self.stack.pop() {
            while let Some(high) = p.left.high {
                if high.1 != u {
                    break;
                }
                p.left.high = self.refs.get(&high).copied();
            }
            if p.left.high.is_none() {
                if let Some(low) = p.left.low {
                    match p.right.low {
                        Some(r) => self.refs.insert(low, r),
                        None => self.refs.remove(&low),
                    };
                    self.side.insert(low, -1);
                    p.left.low = None;
                }
            }
            while let Some(high) = p.right.high {
                if high.1 != u {
                    break;
                }
                p.right.high = self.refs.get(&high).copied();
            }
            if p.right.high.is_none() {
                if let Some(low) = p.right.low {
                    match p.left.low {
                        Some(l) => self.refs.insert(low, l),
                        None => self.refs.remove(&low),
                    };
                    self.side.insert(low, -1);
                    p.right.low = None;
                }
            }
            self.stack.push(p);
        }
        if self.lowpt[&e] < hu {
            let top = self.stack.last().expect("a return edge remains on the stack");
            let (hl, hr) = (top.left.high, top.right.high);
            let pick = match (hl, hr) {
                (Some(l), None) => Some(l),
                (Some(l), Some(r)) if self.lowpt[&l] > self.lowpt[&r] => Some(l),
                _ => hr,
            };
            match pick {
                Some(r) => self.refs.insert(e, r),
                None => self.refs.remove(&e),
            };
        }
    }

    fn sign(&mut self, e: Edge) -> i64 {
        let mut chain = vec![e];
        let mut cur = e;
        while let Some(&next) = self.refs.get(&cur) {
            chain.push(next);
            cur = next;
        }
        let mut s = *self.side.get(&cur).unwrap_or(&1);
        for &x in chain.iter().rev().skip(1) {
            let updated = self.side.get(&x).unwrap_or(&1) * s;
            self.side.insert(x, updated);
            self.refs.remove(&x);
            s = updated;
        }
        s
    }

    fn dfs_embedding(&mut self, v: usize) {
        for idx in 0..self.ordered[v].len() {
            let w = self.ordered[v][idx];
            let ei = (v, w);
            if Some(ei) == self.parent_edge[w] {
                self.rotation.add_first(w, v);
                self.left_ref[v] = w;
                self.right_ref[v] = w;
                self.dfs_embedding(w);
            } else if *self.side.get(&ei).unwrap_or(&1) == 1 {
                let r = self.right_ref[w];
                self.rotation.add_cw(w, v, Some(r));
            } else {
                let r = self.left_ref[w];
                self.rotation.add_ccw(w, v, Some(r));
                self.left_ref[w] = v;
            }
        }
    }
}

/// Clockwise rotation system of a planar embedding, or `None` if the graph
/// is not planar. `adj` must describe a simple undirected graph.
pub(crate) fn planar_embedding(adj: &[Vec<usize>]) -> Option<Vec<Vec<usize>>> {
    let n = adj.len();
    let m: usize = adj.iter().map(Vec::len).sum::<usize>() / 2;
    if n > 2 && m > 3 * n - 6 {
        return None;
    }
    let mut st = LrState::new(adj);
    for v in 0..n {
        if st.height[v].is_none() {
            st.height[v] = Some(0);
            st.roots.push(v);
            st.dfs_orientation(v);
        }
    }
    for v in 0..n {
        let mut ordered = st.out[v].clone();
        ordered.sort_by_key(|&w| st.nesting_depth[&(v, w)]);
        st.ordered[v] = ordered;
    }
    for i in 0..st.roots.len() {
        let r = st.roots[i];
        if !st.dfs_testing(r) {
            return None;
        }
    }
    let edges: Vec<Edge> = (0..n).flat_map(|v| st.out[v].iter().map(move |&w| (v, w))).collect();
    for &e in &edges {
        let s = st.sign(e);
        let d = st.nesting_depth[&e] * s;
        st.nesting_depth.insert(e, d);
    }
    for v in 0..n {
        let mut ordered = st.out[v].clone();
        ordered.sort_by_key(|&w| st.nesting_depth[&(v, w)]);
        let mut previous = None;
        for &w in &ordered {
            st.rotation.add_cw(v, w, previous);
            previous = Some(w);
        }
        st.ordered[v] = ordered;
    }
    for i in 0..st.roots.len() {
        let r = st.roots[i];
        st.dfs_embedding(r);
    }
    Some(st.rotation.cw)
}
