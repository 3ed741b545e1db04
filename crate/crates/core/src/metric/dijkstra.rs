use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Heap entry ordered so that `BinaryHeap` pops the smallest `(cost, node)`.
#[derive(Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths with nonnegative edge costs supplied by
/// `neighbors(u, push)`. Nodes whose cost would exceed `limit` are never
/// settled and stay at infinity.
pub(crate) fn dijkstra_heap(
    n: usize,
    source: usize,
    limit: f64,
    mut neighbors: impl FnMut(usize, &mut dyn FnMut(usize, f64)),
) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry { cost: 0.0, node: source });
    while let Some(Entry { cost, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        neighbors(node, &mut |v, w| {
            let c = cost + w;
            if c <= limit && !done[v] && c < dist[v] {
                dist[v] = c;
                heap.push(Entry { cost: c, node: v });
            }
        });
    }
    dist
}

/// Dijkstra on the complete graph with cost `cost(u, v)`: the O(n²)
/// array-scan variant, ties broken by lower node index.
pub(crate) fn dijkstra_dense(n: usize, source: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; n];
    let mut open: Vec<usize> = (0..n).collect();
    dist[source] = 0.0;
    while !open.is_empty() {
        let mut best = 0;
        for k in 1..open.len() {
            let (a, b) = (open[k], open[best]);
            if dist[a] < dist[b] || (dist[a] == dist[b] && a < b) {
                best = k;
            }
        }
        let u = open.swap_remove(best);
        let du = dist[u];
        for &v in &open {
            let c = du + cost(u, v);
            if c < dist[v] {
                dist[v] = c;
            }
        }
    }
    dist
}
