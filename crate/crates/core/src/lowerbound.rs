//! The set-disjointness diameter gadget `G_{a,b}` and cut-bandwidth audits.
//!
//! Node layout for parameter `k`: `l_v = v` and `r_v = 2k + v` for
//! `v ∈ 0..2k`, then `c_L = 4k`, `c_R = 4k + 1`. `L1 = l_0..l_{k-1}`,
//! `L2 = l_k..l_{2k-1}`, likewise for `R`. Side A is `L ∪ {c_L}`.
//! Bit `i` controls the pair `(i mod k, k + ⌊i/k⌋)`: the edge is present on
//! the left iff `a(i) = 0` and on the right iff `b(i) = 0`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::graph::{exact_diameter, GraphError, NodeId, Weight, WeightedGraph};
use crate::sim::{SimError, SimulationTrace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LowerBoundError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("bit index {i} out of range for k = {k}")]
    IndexOutOfRange { i: usize, k: usize },
    #[error("expected {expected} bits, found {found}")]
    BitLength { expected: usize, found: usize },
    #[error("bad hex string: {0}")]
    Hex(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// `k(n) = ⌊n/10⌋`.
pub fn k_of_n(n: usize) -> usize {
    n / 10
}

/// `(i mod k, k + ⌊i/k⌋)`.
pub fn bit_index_map(i: usize, k: usize) -> Result<(usize, usize), LowerBoundError> {
    if k == 0 || i >= k * k {
        return Err(LowerBoundError::IndexOutOfRange { i, k });
    }
    Ok((i % k, k + i / k))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjointnessInstance {
    k: usize,
    a: Vec<bool>,
    b: Vec<bool>,
}

impl DisjointnessInstance {
    pub fn new(k: usize, a: Vec<bool>, b: Vec<bool>) -> Result<Self, LowerBoundError> {
        for bits in [&a, &b] {
            if bits.len() != k * k {
                return Err(LowerBoundError::BitLength {
                    expected: k * k,
                    found: bits.len(),
                });
            }
        }
        Ok(DisjointnessInstance { k, a, b })
    }

    pub fn zeros(k: usize) -> Self {
        DisjointnessInstance {
            k,
            a: vec![false; k * k],
            b: vec![false; k * k],
        }
    }

    pub fn ones(k: usize) -> Self {
        DisjointnessInstance {
            k,
            a: vec![true; k * k],
            b: vec![true; k * k],
        }
    }

    pub fn random<R: Rng>(k: usize, rng: &mut R) -> Self {
        let a = crate::random::random_bits(k * k, rng);
        let b = crate::random::random_bits(k * k, rng);
        DisjointnessInstance { k, a, b }
    }

    pub fn from_hex(k: usize, a: &str, b: &str) -> Result<Self, LowerBoundError> {
        Self::new(k, decode_hex(a, k * k)?, decode_hex(b, k * k)?)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn a(&self) -> &[bool] {
        &self.a
    }

    pub fn b(&self) -> &[bool] {
        &self.b
    }

    pub fn a_hex(&self) -> String {
        encode_hex(&self.a)
    }

    pub fn b_hex(&self) -> String {
        encode_hex(&self.b)
    }

    /// Some index with `a(i) = b(i) = 1`.
    pub fn witness(&self) -> Option<usize> {
        (0..self.a.len()).find(|&i| self.a[i] && self.b[i])
    }
}

/// Bits MSB-first within each nibble, zero-padded to whole hex digits.
fn encode_hex(bits: &[bool]) -> String {
    bits.chunks(4)
        .map(|c| {
            let v = c
                .iter()
                .enumerate()
                .fold(0u32, |acc, (j, &b)| acc | (u32::from(b) << (3 - j)));
            char::from_digit(v, 16).expect("nibble")
        })
        .collect()
}

fn decode_hex(s: &str, len: usize) -> Result<Vec<bool>, LowerBoundError> {
    let digits = len.div_ceil(4);
    if s.len() != digits {
        return Err(LowerBoundError::Hex(format!(
            "expected {digits} hex digits for {len} bits, found {}",
            s.len()
        )));
    }
    let mut bits = Vec::with_capacity(digits * 4);
    for c in s.chars() {
        let v = c
            .to_digit(16)
            .ok_or_else(|| LowerBoundError::Hex(format!("invalid digit {c:?}")))?;
        bits.extend((0..4).map(|j| (v >> (3 - j)) & 1 == 1));
    }
    if bits[len..].iter().any(|&b| b) {
        return Err(LowerBoundError::Hex("padding bits must be zero".into()));
    }
    bits.truncate(len);
    Ok(bits)
}

/// `1` if no index has `a(i) = b(i) = 1`, else `0`.
pub fn disjointness(inst: &DisjointnessInstance) -> u8 {
    u8::from(inst.witness().is_none())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Role {
    CenterLeft,
    CenterRight,
    L1(usize),
    L2(usize),
    R1(usize),
    R2(usize),
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::CenterLeft => write!(f, "c_L"),
            Role::CenterRight => write!(f, "c_R"),
            Role::L1(i) => write!(f, "L1:{i}"),
            Role::L2(i) => write!(f, "L2:{i}"),
            Role::R1(i) => write!(f, "R1:{i}"),
            Role::R2(i) => write!(f, "R2:{i}"),
        }
    }
}

/// Input for the `gen-gadget` command.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetSpec {
    pub k: usize,
    pub p: u64,
    pub a: String,
    pub b: String,
    pub weighted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetGraph {
    graph: WeightedGraph,
    k: usize,
    weighted: bool,
    sides: Vec<Side>,
    roles: Vec<Role>,
    cut_edges: Vec<(NodeId, NodeId)>,
}

pub fn build_gab(
    inst: &DisjointnessInstance,
    p: u64,
    weighted: bool,
) -> Result<GadgetGraph, LowerBoundError> {
    let k = inst.k;
    if k < 2 {
        return Err(LowerBoundError::InvalidParameter(format!(
            "k = {k}, need k ≥ 2"
        )));
    }
    if weighted && p < 2 {
        return Err(LowerBoundError::InvalidParameter(format!(
            "p = {p}, the weighted gadget needs p ≥ 2"
        )));
    }
    let p = if weighted { p } else { 1 };
    let (unit, light) = (p, 1);
    let n = 4 * k + 2;
    let l = |v: usize| v;
    let r = |v: usize| 2 * k + v;
    let (c_l, c_r) = (4 * k, 4 * k + 1);
    let mut edges = Vec::new();
    for block in [0..k, k..2 * k] {
        for x in block.clone() {
            for y in block.clone().filter(|&y| y > x) {
                edges.push((l(x), l(y), unit));
                edges.push((r(x), r(y), unit));
            }
        }
    }
    for v in 0..2 * k {
        edges.push((c_l, l(v), unit));
        edges.push((c_r, r(v), unit));
    }
    for i in 0..k * k {
        let (u, v) = bit_index_map(i, k)?;
        if !inst.a[i] {
            edges.push((l(u), l(v), unit));
        }
        if !inst.b[i] {
            edges.push((r(u), r(v), unit));
        }
    }
    let mut cut_edges: Vec<(NodeId, NodeId)> = (0..2 * k).map(|v| (l(v), r(v))).collect();
    cut_edges.push((c_l, c_r));
    edges.extend(cut_edges.iter().map(|&(u, v)| (u, v, light)));
    let graph = WeightedGraph::new(n, p, &edges)?;
    let mut sides = vec![Side::A; n];
    let mut roles = Vec::with_capacity(n);
    for v in 0..2 * k {
        roles.push(if v < k { Role::L1(v) } else { Role::L2(v) });
    }
    for v in 0..2 * k {
        sides[r(v)] = Side::B;
        roles.push(if v < k { Role::R1(v) } else { Role::R2(v) });
    }
    roles.push(Role::CenterLeft);
    roles.push(Role::CenterRight);
    sides[c_r] = Side::B;
    Ok(GadgetGraph {
        graph,
        k,
        weighted,
        sides,
        roles,
        cut_edges,
    })
}

impl GadgetGraph {
    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> u64 {
        self.graph.p()
    }

    pub fn weighted(&self) -> bool {
        self.weighted
    }

    pub fn sides(&self) -> &[Side] {
        &self.sides
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn cut_edges(&self) -> &[(NodeId, NodeId)] {
        &self.cut_edges
    }

    pub fn left(&self, v: usize) -> NodeId {
        v
    }

    pub fn right(&self, v: usize) -> NodeId {
        2 * self.k + v
    }

    pub fn center_left(&self) -> NodeId {
        4 * self.k
    }

    pub fn center_right(&self) -> NodeId {
        4 * self.k + 1
    }

    /// `true` for side A.
    pub fn side_a_mask(&self) -> Vec<bool> {
        self.sides.iter().map(|&s| s == Side::A).collect()
    }

    /// `{side: [...], role: [...]}` indexed by node.
    pub fn labels_json(&self) -> serde_json::Value {
        json!({
            "side": self.sides,
            "role": self.roles.iter().map(ToString::to_string).collect::<Vec<_>>(),
        })
    }

    /// Checks the structural invariants; returns the first violation.
    pub fn audit(&self, inst: &DisjointnessInstance) -> Result<(), String> {
        let g = &self.graph;
        let k = self.k;
        let unit = self.p();
        if g.n() != 4 * k + 2 {
            return Err(format!("n = {}, expected {}", g.n(), 4 * k + 2));
        }
        if self.cut_edges.len() != 2 * k + 1 {
            return Err(format!("{} cut edges", self.cut_edges.len()));
        }
        for &(u, v, q) in g.edges() {
            let crossing = self.sides[u] != self.sides[v];
            let is_cut = self.cut_edges.contains(&(u, v));
            if crossing != is_cut {
                return Err(format!("edge ({u}, {v}) crossing={crossing} cut={is_cut}"));
            }
            let expected = if is_cut { 1 } else { unit };
            if q != expected {
                return Err(format!(
                    "edge ({u}, {v}) has numerator {q}, expected {expected}"
                ));
            }
        }
        for v in 0..2 * k {
            if g.weight(self.center_left(), self.left(v)).is_none()
                || g.weight(self.center_right(), self.right(v)).is_none()
            {
                return Err(format!("center not adjacent to index {v}"));
            }
        }
        for block in [0..k, k..2 * k] {
            for x in block.clone() {
                for y in block.clone().filter(|&y| y > x) {
                    if g.weight(self.left(x), self.left(y)).is_none()
                        || g.weight(self.right(x), self.right(y)).is_none()
                    {
                        return Err(format!("clique edge ({x}, {y}) missing"));
                    }
                }
            }
        }
        for i in 0..k * k {
            let (u, v) = bit_index_map(i, k).map_err(|e| e.to_string())?;
            let left = g.weight(self.left(u), self.left(v)).is_some();
            let right = g.weight(self.right(u), self.right(v)).is_some();
            if left == inst.a[i] || right == inst.b[i] {
                return Err(format!("input edge for bit {i} does not match the input"));
            }
        }
        // removing C separates the sides
        let mut adj = g.adjacency().clone();
        for (u, row) in adj.iter_mut().enumerate() {
            let side = self.sides[u];
            row.retain(|&(v, _)| self.sides[v] == side);
        }
        let reach = crate::graph::bfs_hops(&adj, 0);
        if reach
            .iter()
            .enumerate()
            .any(|(v, d)| d.is_some() && self.sides[v] == Side::B)
        {
            return Err("sides stay connected without the cut".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapReport {
    pub disjoint: bool,
    pub observed: Weight,
    pub predicted: Weight,
    pub consistent: bool,
}

/// Exact weighted diameter against `(p+1)/p` (disjoint) or `(2p+1)/p`.
pub fn verify_diameter_gap(gadget: &GadgetGraph, inst: &DisjointnessInstance) -> GapReport {
    let p = gadget.p();
    let disjoint = disjointness(inst) == 1;
    let predicted = Weight::new(if disjoint { p + 1 } else { 2 * p + 1 }, p);
    let observed = exact_diameter(gadget.graph());
    GapReport {
        disjoint,
        observed,
        predicted,
        consistent: observed == predicted,
    }
}

/// Exact hop diameter of the unit-weight gadget against 2 (disjoint) or 3.
pub fn verify_unweighted_gap(gadget: &GadgetGraph, inst: &DisjointnessInstance) -> GapReport {
    let disjoint = disjointness(inst) == 1;
    let predicted = Weight::new(if disjoint { 2 } else { 3 }, 1);
    let observed = exact_diameter(gadget.graph());
    GapReport {
        disjoint,
        observed,
        predicted,
        consistent: observed == predicted,
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundAudit {
    pub round: usize,
    /// Bits from side A to side B.
    pub a_to_b: u64,
    /// Bits from side B to side A.
    pub b_to_a: u64,
    pub cut_bits: u64,
    pub budget: u64,
    pub within_budget: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BandwidthAudit {
    pub bandwidth: u32,
    pub budget: u64,
    pub rounds: Vec<RoundAudit>,
    pub total_cut_bits: u64,
    pub all_within_budget: bool,
}

/// Per-round bits across the `(A, B)` cut against the budget `n·B`.
pub fn bandwidth_audit<O>(
    trace: &SimulationTrace<O>,
    gadget: &GadgetGraph,
) -> Result<BandwidthAudit, LowerBoundError> {
    let budget = gadget.n() as u64 * u64::from(trace.bandwidth());
    let rounds: Vec<RoundAudit> = trace
        .cut_traffic(gadget.graph(), &gadget.side_a_mask())?
        .into_iter()
        .map(|c| RoundAudit {
            round: c.round,
            a_to_b: c.out_of_part,
            b_to_a: c.into_part,
            cut_bits: c.total(),
            budget,
            within_budget: c.total() <= budget,
        })
        .collect();
    Ok(BandwidthAudit {
        bandwidth: trace.bandwidth(),
        budget,
        total_cut_bits: rounds.iter().map(|r| r.cut_bits).sum(),
        all_within_budget: rounds.iter().all(|r| r.within_budget),
        rounds,
    })
}
