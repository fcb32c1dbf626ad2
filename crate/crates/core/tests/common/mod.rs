//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use cliquesim::{NodeId, WeightedGraph};

pub const INF: u64 = u64::MAX;

/// Floyd–Warshall over the numerators.
pub fn floyd_warshall(g: &WeightedGraph) -> Vec<Vec<u64>> {
    floyd_edges(g.n(), g.edges())
}

/// Floyd–Warshall over an undirected edge list.
pub fn floyd_edges(n: usize, edges: &[(NodeId, NodeId, u64)]) -> Vec<Vec<u64>> {
    let mut d = vec![vec![INF; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0;
    }
    for &(u, v, q) in edges {
        d[u][v] = d[u][v].min(q);
        d[v][u] = d[v][u].min(q);
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k] == INF {
                continue;
            }
            for j in 0..n {
                if d[k][j] != INF && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Minimum weight over every simple path, by exhaustive DFS.
pub fn all_simple_paths_min(g: &WeightedGraph, s: NodeId) -> Vec<u64> {
    fn dfs(g: &WeightedGraph, u: NodeId, len: u64, seen: &mut Vec<bool>, best: &mut Vec<u64>) {
        best[u] = best[u].min(len);
        for &(v, q) in g.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                dfs(g, v, len + q, seen, best);
                seen[v] = false;
            }
        }
    }
    let mut best = vec![INF; g.n()];
    let mut seen = vec![false; g.n()];
    seen[s] = true;
    dfs(g, s, 0, &mut seen, &mut best);
    best
}

/// Min weight over walks with at most `h` edges, by dynamic programming
/// over the edge list (a different formulation than the library's).
pub fn h_hop_table(n: usize, edges: &[(NodeId, NodeId, u64)], s: NodeId, h: usize) -> Vec<u64> {
    let mut cur = vec![INF; n];
    cur[s] = 0;
    for _ in 0..h {
        let mut next = cur.clone();
        for &(u, v, q) in edges {
            if cur[u] != INF {
                next[v] = next[v].min(cur[u] + q);
            }
            if cur[v] != INF {
                next[u] = next[u].min(cur[v] + q);
            }
        }
        cur = next;
    }
    cur
}

/// Unweighted BFS distances.
pub fn bfs(g: &WeightedGraph, s: NodeId) -> Vec<u64> {
    let mut d = vec![INF; g.n()];
    d[s] = 0;
    let mut frontier = vec![s];
    let mut level = 0;
    while !frontier.is_empty() {
        level += 1;
        let mut next = Vec::new();
        for u in frontier {
            for &(v, _) in g.neighbors(u) {
                if d[v] == INF {
                    d[v] = level;
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    d
}

/// `S^k(u)` by sorting all `(distance, id)` pairs.
pub fn closest_by_sort(dist: &[u64], k: usize) -> Vec<NodeId> {
    let mut order: Vec<(u64, NodeId)> = dist.iter().copied().zip(0..).collect();
    order.sort();
    order.into_iter().take(k).map(|(_, v)| v).collect()
}

/// Size of a minimum hitting set by exhaustive search over subsets.
pub fn min_hitting_set_size(n: usize, family: &[Vec<NodeId>]) -> usize {
    let masks: Vec<u32> = family
        .iter()
        .map(|s| s.iter().fold(0u32, |m, &v| m | (1 << v)))
        .collect();
    (0u32..(1 << n))
        .filter(|&sel| masks.iter().all(|&m| m & sel != 0))
        .map(|sel| sel.count_ones() as usize)
        .min()
        .expect("the full set always hits")
}

/// Brute-force source lists: all `(d, s)` with `d ≤ h`, sorted, first `k`.
pub fn source_lists(
    dist_from: &[Vec<u64>],
    sources: &[NodeId],
    h: u64,
    k: usize,
) -> Vec<Vec<(u64, NodeId)>> {
    let n = dist_from[0].len();
    (0..n)
        .map(|v| {
            let mut list: Vec<(u64, NodeId)> = sources
                .iter()
                .filter(|&&s| dist_from[s][v] <= h)
                .map(|&s| (dist_from[s][v], s))
                .collect();
            list.sort();
            list.dedup();
            list.truncate(k);
            list
        })
        .collect()
}
