use std::collections::BTreeMap;

use super::neighborhood::NeighborhoodTable;
use super::AlgoError;
use crate::graph::{shortest_paths, Adjacency, DistanceMatrix, NodeId, WeightedGraph};

/// `G^k`: the base graph plus an edge `(u, v)` for every `v ∈ S^k(u)`, with
/// every edge weighted by the shortcut assignment `w′`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShortcutGraph {
    base: WeightedGraph,
    table: NeighborhoodTable,
    /// `E^k`, canonical `u < v`, sorted.
    edges: Vec<(NodeId, NodeId, u64)>,
    adj: Adjacency,
}

pub fn build_shortcut_graph(g: &WeightedGraph, k: usize) -> Result<ShortcutGraph, AlgoError> {
    if k > g.n() {
        return Err(AlgoError::KTooLarge { k, n: g.n() });
    }
    Ok(ShortcutGraph::from_table(
        g.clone(),
        NeighborhoodTable::exact(g, k)?,
    ))
}

impl ShortcutGraph {
    pub fn from_table(base: WeightedGraph, table: NeighborhoodTable) -> Self {
        let n = base.n();
        let adj: Adjacency = (0..n)
            .map(|u| table.incident_edges(u, base.neighbors(u)))
            .collect();
        let edges = adj
            .iter()
            .enumerate()
            .flat_map(|(u, row)| {
                row.iter()
                    .filter(move |&&(v, _)| u < v)
                    .map(move |&(v, w)| (u, v, w))
            })
            .collect();
        ShortcutGraph {
            base,
            table,
            edges,
            adj,
        }
    }

    pub fn base(&self) -> &WeightedGraph {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn p(&self) -> u64 {
        self.base.p()
    }

    pub fn k(&self) -> usize {
        self.table.k()
    }

    pub fn table(&self) -> &NeighborhoodTable {
        &self.table
    }

    /// `(u, v, d(u, v))` for `v ∈ S^k(u)`, `v ≠ u`, deduplicated to `u < v`.
    pub fn shortcut_edges(&self) -> Vec<(NodeId, NodeId, u64)> {
        let mut out = BTreeMap::new();
        for u in 0..self.n() {
            for &(v, d) in self.table.list(u) {
                if v != u {
                    out.insert((u.min(v), u.max(v)), d);
                }
            }
        }
        out.into_iter().map(|((u, v), d)| (u, v, d)).collect()
    }

    /// `E^k` with `w′`.
    pub fn edges(&self) -> &[(NodeId, NodeId, u64)] {
        &self.edges
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adj
    }

    /// `w′(u, v)` if `(u, v) ∈ E^k`.
    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<u64> {
        let row = &self.adj[u];
        row.binary_search_by_key(&v, |e| e.0).ok().map(|i| row[i].1)
    }

    /// The shortcut assignment for an arbitrary pair, minimized over both
    /// endpoints; `None` when neither endpoint can bound the distance.
    pub fn assigned_weight(&self, u: NodeId, v: NodeId) -> Option<u64> {
        if u == v {
            return Some(0);
        }
        self.table.symmetric_weight(u, v, self.base.weight(u, v))
    }

    /// `W`: the largest `w′` numerator on `E^k`.
    pub fn max_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.2).max().unwrap_or(0)
    }

    /// Shortest-path metric of `(G^k, w′)`.
    pub fn metric(&self) -> DistanceMatrix {
        let rows = (0..self.n())
            .map(|s| {
                shortest_paths(&self.adj, s)
                    .into_iter()
                    .map(|d| d.expect("G^k contains the connected base graph"))
                    .collect()
            })
            .collect();
        DistanceMatrix::from_rows(self.p(), rows)
    }
}
