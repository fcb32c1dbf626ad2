//! Weighted graphs with exact rational edge weights and sequential
//! shortest-path oracles.
//!
//! Every weight in a graph is `q / p` for a per-graph denominator `p`; all
//! arithmetic happens on the integer numerators `q`, so comparisons between
//! distances are exact. A graph is validated once at construction (no self
//! loops, no duplicate edges, numerators in range, connected) and is
//! immutable afterwards.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;

pub type NodeId = usize;

/// Adjacency lists with integer weights, `adj[u]` sorted by neighbor.
pub type Adjacency = Vec<Vec<(NodeId, u64)>>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("weight denominator must be positive")]
    ZeroDenominator,
    #[error("node {node} out of range for n = {n}")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("self loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(NodeId, NodeId),
    #[error("edge ({u}, {v}) has numerator {numerator}, allowed range is 1..={max}")]
    WeightOutOfRange {
        u: NodeId,
        v: NodeId,
        numerator: u64,
        max: u64,
    },
    #[error("graph is disconnected: node {0} is unreachable from node 0")]
    Disconnected(NodeId),
    #[error("n * p^2 = {0} does not fit in 63 bits")]
    Overflow(u128),
    #[error("k = {k} exceeds node count {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A rational weight `num / den`. Ordering compares the rational values.
#[derive(Copy, Clone, Debug, Serialize, Deserialize)]
pub struct Weight {
    pub num: u64,
    pub den: u64,
}

impl Weight {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        Weight { num, den }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialEq for Weight {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Weight {}

impl PartialOrd for Weight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Weight {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Distance under a hop budget. `Unreachable` sorts after every finite value.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HopDistance {
    Finite(u64),
    Unreachable,
}

impl HopDistance {
    pub fn finite(self) -> Option<u64> {
        match self {
            HopDistance::Finite(d) => Some(d),
            HopDistance::Unreachable => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    n: usize,
    p: u64,
    /// Canonical edge list, `u < v`, sorted.
    edges: Vec<(NodeId, NodeId, u64)>,
    adj: Adjacency,
}

/// Validates and builds a graph whose numerators lie in `1..=p²`.
pub fn make_graph(
    n: usize,
    p: u64,
    edge_list: &[(NodeId, NodeId, u64)],
) -> Result<WeightedGraph, GraphError> {
    WeightedGraph::new(n, p, edge_list)
}

impl WeightedGraph {
    pub fn new(n: usize, p: u64, edge_list: &[(NodeId, NodeId, u64)]) -> Result<Self, GraphError> {
        let max = check_params(n, p)?.0;
        Self::build(n, p, edge_list, max)
    }

    /// Like [`WeightedGraph::new`] but admits path-length numerators up to
    /// `n·p²`, as carried by shortcut edges.
    pub fn with_derived_weights(
        n: usize,
        p: u64,
        edge_list: &[(NodeId, NodeId, u64)],
    ) -> Result<Self, GraphError> {
        let max = check_params(n, p)?.1;
        Self::build(n, p, edge_list, max)
    }

    fn build(
        n: usize,
        p: u64,
        edge_list: &[(NodeId, NodeId, u64)],
        max: u64,
    ) -> Result<Self, GraphError> {
        let mut edges = Vec::with_capacity(edge_list.len());
        for &(u, v, q) in edge_list {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::NodeOutOfRange { node: x, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if q == 0 || q > max {
                return Err(GraphError::WeightOutOfRange {
                    u,
                    v,
                    numerator: q,
                    max,
                });
            }
            edges.push((u.min(v), u.max(v), q));
        }
        edges.sort_unstable();
        if let Some(w) = edges
            .windows(2)
            .find(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1)
        {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }
        let mut adj: Adjacency = vec![Vec::new(); n];
        for &(u, v, q) in &edges {
            adj[u].push((v, q));
            adj[v].push((u, q));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let hops = bfs_hops(&adj, 0);
        if let Some(unreached) = hops.iter().position(Option::is_none) {
            return Err(GraphError::Disconnected(unreached));
        }
        Ok(WeightedGraph { n, p, edges, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId, u64)] {
        &self.edges
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adj
    }

    pub fn neighbors(&self, u: NodeId) -> &[(NodeId, u64)] {
        &self.adj[u]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u].len()
    }

    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<u64> {
        let list = &self.adj[u];
        list.binary_search_by_key(&v, |&(x, _)| x)
            .ok()
            .map(|i| list[i].1)
    }

    pub fn max_numerator(&self) -> u64 {
        self.edges.iter().map(|e| e.2).max().unwrap_or(0)
    }

    /// The `k` lightest incident edges of `u`, ordered by `(weight, neighbor)`.
    pub fn lightest_edges(&self, u: NodeId, k: usize) -> Vec<(NodeId, u64)> {
        let mut list = self.adj[u].clone();
        list.sort_unstable_by_key(|&(v, q)| (q, v));
        list.truncate(k);
        list
    }

    /// Unweighted (hop) diameter.
    pub fn hop_diameter(&self) -> usize {
        (0..self.n)
            .map(|s| {
                bfs_hops(&self.adj, s)
                    .into_iter()
                    .flatten()
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    /// Serializes to the text format: `n m p` then one `u v q` line per edge.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.n, self.edges.len(), self.p);
        for &(u, v, q) in &self.edges {
            out.push_str(&format!("{u} {v} {q}\n"));
        }
        out
    }
}

impl FromStr for WeightedGraph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let parse_ints = |line: usize, text: &str| -> Result<Vec<u64>, GraphError> {
            let nums = text
                .split_whitespace()
                .map(|t| t.parse::<u64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| GraphError::Parse {
                    line: line + 1,
                    msg: e.to_string(),
                })?;
            if nums.len() != 3 {
                return Err(GraphError::Parse {
                    line: line + 1,
                    msg: format!("expected 3 integers, found {}", nums.len()),
                });
            }
            Ok(nums)
        };
        let (hl, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let head = parse_ints(hl, header)?;
        let (n, m, p) = (head[0] as usize, head[1] as usize, head[2]);
        let mut edges = Vec::with_capacity(m);
        for (ln, text) in lines {
            let e = parse_ints(ln, text)?;
            edges.push((e[0] as usize, e[1] as usize, e[2]));
        }
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: 1,
                msg: format!("header announces {m} edges, found {}", edges.len()),
            });
        }
        WeightedGraph::new(n, p, &edges)
    }
}

fn check_params(n: usize, p: u64) -> Result<(u64, u64), GraphError> {
    if n == 0 {
        return Err(GraphError::Empty);
    }
    if p == 0 {
        return Err(GraphError::ZeroDenominator);
    }
    let p2 = p as u128 * p as u128;
    let path_max = n as u128 * p2;
    if path_max > i64::MAX as u128 {
        return Err(GraphError::Overflow(path_max));
    }
    Ok((p2 as u64, path_max as u64))
}

/// Hop distances from `s` by BFS; `None` where unreachable.
pub fn bfs_hops(adj: &[Vec<(NodeId, u64)>], s: NodeId) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    let mut queue = VecDeque::new();
    dist[s] = Some(0);
    queue.push_back(s);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap_or(0);
        for &(v, _) in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Dijkstra over arbitrary integer adjacency lists.
pub fn shortest_paths(adj: &[Vec<(NodeId, u64)>], s: NodeId) -> Vec<Option<u64>> {
    let mut dist: Vec<Option<u64>> = vec![None; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[s] = Some(0);
    heap.push(Reverse((0u64, s)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if dist[u].is_some_and(|best| d > best) {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if dist[v].is_none_or(|best| nd < best) {
                dist[v] = Some(nd);
                heap.push(Reverse((nd, v)));
            }
        }
    }
    dist
}

/// Exact distance numerators from `s` (over `g.p()`).
pub fn dijkstra(g: &WeightedGraph, s: NodeId) -> Vec<u64> {
    shortest_paths(&g.adj, s)
        .into_iter()
        .map(|d| d.expect("validated graphs are connected"))
        .collect()
}

/// Dense `n × n` matrix of distance numerators over a shared denominator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    n: usize,
    p: u64,
    data: Vec<u64>,
}

impl DistanceMatrix {
    pub fn from_rows(p: u64, rows: Vec<Vec<u64>>) -> Self {
        let n = rows.len();
        let data: Vec<u64> = rows.into_iter().flatten().collect();
        assert_eq!(data.len(), n * n, "rows must be square");
        DistanceMatrix { n, p, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn get(&self, u: NodeId, v: NodeId) -> u64 {
        self.data[u * self.n + v]
    }

    pub fn weight(&self, u: NodeId, v: NodeId) -> Weight {
        Weight::new(self.get(u, v), self.p)
    }

    pub fn row(&self, u: NodeId) -> &[u64] {
        &self.data[u * self.n..(u + 1) * self.n]
    }

    pub fn max(&self) -> u64 {
        self.data.iter().copied().max().unwrap_or(0)
    }
}

pub fn exact_apsp(g: &WeightedGraph) -> DistanceMatrix {
    exact_apsp_with(g, Execution::default())
}

pub fn exact_apsp_with(g: &WeightedGraph, exec: Execution) -> DistanceMatrix {
    let rows = exec.map_indexed(g.n, |s| dijkstra(g, s));
    DistanceMatrix::from_rows(g.p, rows)
}

pub fn exact_diameter(g: &WeightedGraph) -> Weight {
    Weight::new(exact_apsp(g).max(), g.p)
}

/// `S^k(u)` with distance numerators: the `k` nodes minimizing
/// `(d(u, ·), id)`, in that order.
pub fn k_closest_with_distances(
    g: &WeightedGraph,
    u: NodeId,
    k: usize,
) -> Result<Vec<(NodeId, u64)>, GraphError> {
    if k > g.n {
        return Err(GraphError::KTooLarge { k, n: g.n });
    }
    let mut order: Vec<(u64, NodeId)> = dijkstra(g, u)
        .into_iter()
        .enumerate()
        .map(|(v, d)| (d, v))
        .collect();
    order.sort_unstable();
    Ok(order.into_iter().take(k).map(|(d, v)| (v, d)).collect())
}

pub fn k_closest(g: &WeightedGraph, u: NodeId, k: usize) -> Result<Vec<NodeId>, GraphError> {
    Ok(k_closest_with_distances(g, u, k)?
        .into_iter()
        .map(|(v, _)| v)
        .collect())
}

/// Bellman-Ford with `h` relaxation rounds over integer adjacency lists.
pub fn hop_bounded_paths(adj: &[Vec<(NodeId, u64)>], s: NodeId, h: usize) -> Vec<HopDistance> {
    let mut dist = vec![HopDistance::Unreachable; adj.len()];
    dist[s] = HopDistance::Finite(0);
    for _ in 0..h {
        let mut next = dist.clone();
        let mut changed = false;
        for (u, du) in dist.iter().enumerate() {
            let HopDistance::Finite(du) = *du else {
                continue;
            };
            for &(v, w) in &adj[u] {
                let cand = HopDistance::Finite(du + w);
                if cand < next[v] {
                    next[v] = cand;
                    changed = true;
                }
            }
        }
        dist = next;
        if !changed {
            break;
        }
    }
    dist
}

pub fn h_hop_distances(g: &WeightedGraph, u: NodeId, h: usize) -> Vec<HopDistance> {
    hop_bounded_paths(&g.adj, u, h)
}

pub fn h_hop_distance(g: &WeightedGraph, u: NodeId, v: NodeId, h: usize) -> HopDistance {
    h_hop_distances(g, u, h)[v]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> WeightedGraph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1)).collect();
        make_graph(n, 1, &edges).unwrap()
    }

    #[test]
    fn construction_errors() {
        assert!(make_graph(2, 1, &[(0, 1, 1)]).is_ok());
        assert_eq!(
            make_graph(3, 1, &[(0, 1, 1)]),
            Err(GraphError::Disconnected(2))
        );
        assert!(matches!(
            make_graph(3, 4, &[(0, 1, 17)]),
            Err(GraphError::WeightOutOfRange {
                numerator: 17,
                max: 16,
                ..
            })
        ));
        assert!(matches!(
            make_graph(3, 4, &[(0, 1, 0), (1, 2, 1)]),
            Err(GraphError::WeightOutOfRange { numerator: 0, .. })
        ));
        assert_eq!(make_graph(2, 1, &[(0, 0, 1)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(
            make_graph(2, 1, &[(0, 1, 1), (1, 0, 1)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert!(matches!(
            make_graph(2, 1, &[(0, 5, 1)]),
            Err(GraphError::NodeOutOfRange { node: 5, .. })
        ));
        assert!(matches!(
            make_graph(4, 1 << 31, &[(0, 1, 1), (1, 2, 1), (2, 3, 1)]),
            Err(GraphError::Overflow(_))
        ));
    }

    #[test]
    fn dijkstra_examples() {
        assert_eq!(dijkstra(&path(3), 0), vec![0, 1, 2]);
        // 0-1 (3/2), 1-2 (3/2), 0-2 (4/2)
        let tri = make_graph(3, 2, &[(0, 1, 3), (1, 2, 3), (0, 2, 4)]).unwrap();
        assert_eq!(dijkstra(&tri, 0), vec![0, 3, 4]);
    }

    #[test]
    fn apsp_and_diameter() {
        let star = make_graph(5, 1, &[(0, 1, 1), (0, 2, 1), (0, 3, 1), (0, 4, 1)]).unwrap();
        let d = exact_apsp(&star);
        for u in 1..5 {
            assert_eq!(d.get(0, u), 1);
            for v in 1..5 {
                assert_eq!(d.get(u, v), if u == v { 0 } else { 2 });
            }
        }
        let edge = make_graph(2, 3, &[(0, 1, 5)]).unwrap();
        assert_eq!(
            exact_apsp(&edge),
            DistanceMatrix::from_rows(3, vec![vec![0, 5], vec![5, 0]])
        );
        assert_eq!(exact_diameter(&edge), Weight::new(5, 3));

        let cycle: Vec<_> = (0..6).map(|i| (i, (i + 1) % 6, 1)).collect();
        let cycle = make_graph(6, 1, &cycle).unwrap();
        assert_eq!(exact_diameter(&cycle), Weight::new(3, 1));
    }

    #[test]
    fn k_closest_examples() {
        let g = path(5);
        assert_eq!(k_closest(&g, 3, 1).unwrap(), vec![3]);
        assert_eq!(k_closest(&g, 2, 3).unwrap(), vec![2, 1, 3]);
        assert_eq!(
            k_closest(&g, 2, 6),
            Err(GraphError::KTooLarge { k: 6, n: 5 })
        );
    }

    #[test]
    fn h_hop_examples() {
        let g = path(3);
        assert_eq!(h_hop_distance(&g, 1, 1, 0), HopDistance::Finite(0));
        assert_eq!(h_hop_distance(&g, 0, 2, 1), HopDistance::Unreachable);
        // weights 1, 1, 3 expressed over p = 3
        let tri = make_graph(3, 3, &[(0, 1, 3), (1, 2, 3), (0, 2, 9)]).unwrap();
        assert_eq!(h_hop_distance(&tri, 0, 2, 1), HopDistance::Finite(9));
        assert_eq!(h_hop_distance(&tri, 0, 2, 2), HopDistance::Finite(6));
    }

    #[test]
    fn text_format_round_trip() {
        let g = make_graph(3, 2, &[(2, 1, 3), (0, 1, 4)]).unwrap();
        let text = g.to_text();
        assert_eq!(text, "3 2 2\n0 1 4\n1 2 3\n");
        assert_eq!(text.parse::<WeightedGraph>().unwrap(), g);
        assert!("3 2 2\n0 1 4\n".parse::<WeightedGraph>().is_err());
        assert!("2 1 1\n0 x 1\n".parse::<WeightedGraph>().is_err());
    }

    #[test]
    fn weight_ordering_is_rational() {
        assert_eq!(Weight::new(2, 4), Weight::new(1, 2));
        assert!(Weight::new(17, 16) < Weight::new(33, 16));
        assert!(Weight::new(1, 3) < Weight::new(1, 2));
    }

    #[test]
    fn lightest_edges_tie_break_by_neighbor() {
        let g = make_graph(4, 1, &[(0, 3, 1), (0, 1, 1), (0, 2, 1)]).unwrap();
        assert_eq!(g.lightest_edges(0, 2), vec![(1, 1), (2, 1)]);
    }
}
