//! Bellman-Ford with negative-cycle extraction, generic over the weight type.

use std::ops::Add;

use num_traits::Zero;

/// Weighted edge `(from, to, weight)`.
pub(crate) type WEdge<W> = (usize, usize, W);

/// A negative cycle as edge indices in traversal order, or `None` if every cycle is nonnegative.
///
/// Every node starts at distance zero, as if reached from a virtual source.
pub(crate) fn negative_cycle<W>(n: usize, edges: &[WEdge<W>]) -> Option<Vec<usize>>
where
    W: Clone + Ord + Zero + for<'a> Add<&'a W, Output = W>,
{
    let mut dist: Vec<W> = vec![W::zero(); n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut changed = None;
    for _ in 0..=n {
        changed = None;
        for (i, (u, v, w)) in edges.iter().enumerate() {
            let cand = dist[*u].clone() + w;
            if cand < dist[*v] {
                dist[*v] = cand;
                pred[*v] = Some(i);
                changed = Some(*v);
            }
        }
        changed?;
    }
    let mut v = changed?;
    for _ in 0..n {
        v = edges[pred[v]?].0;
    }
    let start = v;
    let mut cycle = Vec::new();
    loop {
        let e = pred[v]?;
        cycle.push(e);
        v = edges[e].0;
        if v == start {
            break;
        }
    }
    cycle.reverse();
    Some(cycle)
}

/// Shortest distances from `source` and the last edge of a shortest path to each node.
/// Callers guarantee there is no negative cycle.
pub(crate) fn shortest_paths<W>(n: usize, edges: &[WEdge<W>], source: usize) -> (Vec<Option<W>>, Vec<Option<usize>>)
where
    W: Clone + Ord + Zero + for<'a> Add<&'a W, Output = W>,
{
    let mut dist: Vec<Option<W>> = vec![None; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    dist[source] = Some(W::zero());
    for _ in 0..n {
        let mut any = false;
        for (i, (u, v, w)) in edges.iter().enumerate() {
            if let Some(du) = &dist[*u] {
                let cand = du.clone() + w;
                if dist[*v].as_ref().is_none_or(|dv| &cand < dv) {
                    dist[*v] = Some(cand);
                    pred[*v] = Some(i);
                    any = true;
                }
            }
        }
        if !any {
            break;
        }
    }
    (dist, pred)
}

/// Edge indices of the shortest-path tree path from the source to `target`.
pub(crate) fn tree_path<W>(edges: &[WEdge<W>], pred: &[Option<usize>], mut target: usize) -> Vec<usize> {
    let mut path = Vec::new();
    while let Some(e) = pred[target] {
        path.push(e);
        target = edges[e].0;
        if path.len() > pred.len() {
            break;
        }
    }
    path.reverse();
    path
}

/// Breadth-first shortest path from any of `sources` to `target`, as edge indices.
pub(crate) fn bfs_path(n: usize, edges: &[(usize, usize)], sources: &[usize], target: usize) -> Option<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &(u, _)) in edges.iter().enumerate() {
        out[u].push(i);
    }
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    for &s in sources {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        if u == target {
            let mut path = Vec::new();
            let mut v = u;
            while let Some(e) = pred[v] {
                path.push(e);
                v = edges[e].0;
            }
            path.reverse();
            return Some(path);
        }
        for &e in &out[u] {
            let v = edges[e].1;
            if !seen[v] {
                seen[v] = true;
                pred[v] = Some(e);
                queue.push_back(v);
            }
        }
    }
    None
}
