/// Every perfect matching of the graph on `0..n`, by exhaustive search.
/// Each matching is a sorted list of `(u, v)` pairs with `u < v`.
pub fn enumerate_perfect_matchings(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    adj.iter_mut().for_each(|a| {
        a.sort_unstable();
        a.dedup();
    });
    let mut out = Vec::new();
    let mut matched = vec![false; n];
    let mut current = Vec::new();
    extend(&adj, &mut matched, &mut current, &mut out);
    out
}

fn extend(adj: &[Vec<usize>], matched: &mut [bool], current: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
    let Some(u) = matched.iter().position(|m| !m) else {
        out.push(current.clone());
        return;
    };
    matched[u] = true;
    for &v in &adj[u] {
        if !matched[v] {
            matched[v] = true;
            current.push((u.min(v), u.max(v)));
            extend(adj, matched, current, out);
            current.pop();
            matched[v] = false;
        }
    }
    matched[u] = false;
}
