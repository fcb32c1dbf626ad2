//! `S^k` discovery: the first `2k` broadcast rounds shared by the hitting
//! set and APSP programs.
//!
//! Rounds `1..=k`: every node broadcasts its `i`-th lightest incident edge,
//! ordered by `(weight, neighbor)`. The `k` lightest edges of every node
//! contain a shortest path from `u` to every member of `S^k(u)`, so Dijkstra
//! over the learned edges yields `S^k(u)` exactly. Rounds `k+1..=2k`: every
//! node broadcasts the `i`-th entry of its `S^k(u)` with the distance.

use crate::exec::Execution;
use crate::graph::{k_closest_with_distances, shortest_paths, GraphError, NodeId, WeightedGraph};
use crate::sim::{Inbox, Payload};

/// Every node's `S^k` list with distances, plus the pairwise distances
/// those lists reveal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborhoodTable {
    k: usize,
    lists: Vec<Vec<(NodeId, u64)>>,
    /// `known[x]`: every `(y, d(x, y))` with `y ∈ S^k(x)` or `x ∈ S^k(y)`, sorted by `y`.
    known: Vec<Vec<(NodeId, u64)>>,
}

impl NeighborhoodTable {
    /// `lists[u]` must be `S^k(u)` ordered by `(distance, id)`.
    pub fn from_lists(k: usize, lists: Vec<Vec<(NodeId, u64)>>) -> Self {
        let mut known: Vec<Vec<(NodeId, u64)>> = vec![Vec::new(); lists.len()];
        for (x, list) in lists.iter().enumerate() {
            for &(y, d) in list {
                known[x].push((y, d));
                known[y].push((x, d));
            }
        }
        for row in &mut known {
            row.sort_unstable();
            row.dedup_by_key(|e| e.0);
        }
        NeighborhoodTable { k, lists, known }
    }

    /// Table built from exact Dijkstra runs.
    pub fn exact(g: &WeightedGraph, k: usize) -> Result<Self, GraphError> {
        Self::exact_with(g, k, Execution::default())
    }

    pub fn exact_with(g: &WeightedGraph, k: usize, exec: Execution) -> Result<Self, GraphError> {
        if k > g.n() {
            return Err(GraphError::KTooLarge { k, n: g.n() });
        }
        let lists = exec.map_indexed(g.n(), |u| {
            k_closest_with_distances(g, u, k).expect("k checked above")
        });
        Ok(Self::from_lists(k, lists))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.lists.len()
    }

    /// `S^k(u)` with distances.
    pub fn list(&self, u: NodeId) -> &[(NodeId, u64)] {
        &self.lists[u]
    }

    pub fn members(&self, u: NodeId) -> Vec<NodeId> {
        self.lists[u].iter().map(|&(v, _)| v).collect()
    }

    pub fn lists(&self) -> &[Vec<(NodeId, u64)>] {
        &self.lists
    }

    /// Nodes whose distance to `x` the table reveals (including `x`).
    pub fn known_row(&self, x: NodeId) -> &[(NodeId, u64)] {
        &self.known[x]
    }

    /// `d(x, y)` when `y ∈ S^k(x)` or `x ∈ S^k(y)`; `d(x, x) = 0`.
    pub fn known(&self, x: NodeId, y: NodeId) -> Option<u64> {
        if x == y {
            return Some(0);
        }
        let row = &self.known[x];
        row.binary_search_by_key(&y, |e| e.0).ok().map(|i| row[i].1)
    }

    /// The weight node `u` assigns to `(u, v)`:
    /// `min{base, min_{z ∈ S^k(u)} d(u, z) + d(z, v)}` over the distances the
    /// table reveals.
    pub fn assigned_weight(&self, u: NodeId, v: NodeId, base: Option<u64>) -> Option<u64> {
        let mut best = base;
        for &(z, dz) in &self.lists[u] {
            if let Some(d) = self.known(z, v) {
                let cand = dz + d;
                if best.is_none_or(|b| cand < b) {
                    best = Some(cand);
                }
            }
        }
        best
    }

    /// Minimum of both endpoints' assignments.
    pub fn symmetric_weight(&self, u: NodeId, v: NodeId, base: Option<u64>) -> Option<u64> {
        match (
            self.assigned_weight(u, v, base),
            self.assigned_weight(v, u, base),
        ) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// Neighbors of `u` in `G^k` with their shortcut weights, given `u`'s
    /// own incident edges (sorted by neighbor).
    pub fn incident_edges(&self, u: NodeId, own: &[(NodeId, u64)]) -> Vec<(NodeId, u64)> {
        let mut nbrs: Vec<NodeId> = own.iter().map(|e| e.0).collect();
        nbrs.extend(self.known[u].iter().map(|e| e.0).filter(|&v| v != u));
        nbrs.sort_unstable();
        nbrs.dedup();
        nbrs.into_iter()
            .map(|v| {
                let base = own.binary_search_by_key(&v, |e| e.0).ok().map(|i| own[i].1);
                let w = self
                    .symmetric_weight(u, v, base)
                    .expect("a G^k neighbor always has a weight");
                (v, w)
            })
            .collect()
    }
}

/// `S^k(u)` from the edges `u` has learned.
fn closest_from_edges(u: NodeId, known: &[Vec<(NodeId, u64)>], k: usize) -> Vec<(NodeId, u64)> {
    let mut order: Vec<(u64, NodeId)> = shortest_paths(known, u)
        .into_iter()
        .enumerate()
        .filter_map(|(v, d)| d.map(|d| (d, v)))
        .collect();
    order.sort_unstable();
    order.into_iter().take(k).map(|(d, v)| (v, d)).collect()
}

/// Node-local state for rounds `1..=2k`.
#[derive(Clone, Debug)]
pub(crate) struct NeighborhoodPhase {
    id: NodeId,
    k: usize,
    lightest: Vec<(NodeId, u64)>,
    learned: Vec<Vec<(NodeId, u64)>>,
    closest: Vec<(NodeId, u64)>,
    lists: Vec<Vec<(NodeId, u64)>>,
}

impl NeighborhoodPhase {
    /// `own` holds all edges incident to `id`.
    pub fn new(id: NodeId, n: usize, k: usize, own: &[(NodeId, u64)]) -> Self {
        let mut lightest = own.to_vec();
        lightest.sort_unstable_by_key(|&(v, q)| (q, v));
        lightest.truncate(k);
        let mut learned = vec![Vec::new(); n];
        for &(v, q) in own {
            learned[id].push((v, q));
            learned[v].push((id, q));
        }
        NeighborhoodPhase {
            id,
            k,
            lightest,
            learned,
            closest: Vec::new(),
            lists: vec![Vec::new(); n],
        }
    }

    pub fn rounds(&self) -> usize {
        2 * self.k
    }

    pub fn send(&self, round: usize) -> Option<Payload> {
        if round <= self.k {
            self.lightest.get(round - 1).map(|&(v, q)| Payload::Edge {
                u: self.id,
                v,
                weight: q,
            })
        } else {
            self.closest
                .get(round - self.k - 1)
                .map(|&(node, dist)| Payload::Neighbor { node, dist })
        }
    }

    pub fn receive(&mut self, round: usize, inbox: Inbox<'_>) {
        if round <= self.k {
            for (_, msg) in inbox.iter() {
                if let Payload::Edge { u, v, weight } = *msg {
                    self.learned[u].push((v, weight));
                    self.learned[v].push((u, weight));
                }
            }
            if round == self.k {
                self.closest = closest_from_edges(self.id, &self.learned, self.k);
                self.lists[self.id] = self.closest.clone();
                self.learned = Vec::new();
            }
        } else {
            for (from, msg) in inbox.iter() {
                if let Payload::Neighbor { node, dist } = *msg {
                    self.lists[from].push((node, dist));
                }
            }
        }
    }

    pub fn closest(&self) -> &[(NodeId, u64)] {
        &self.closest
    }

    pub fn into_table(self) -> NeighborhoodTable {
        NeighborhoodTable::from_lists(self.k, self.lists)
    }
}
