//! Weight rounding for hop-bounded approximate distances.
//!
//! With `L = 1/ε` and weights `q/p`, level `i` uses the distance scale
//! `D′_i = 2^i / p` and the integer weights
//! `w′_i = ⌈2h·q/p / (ε·D′_i)⌉ = ⌈2hL·q / 2^i⌉`. A rounded distance `d` at
//! level `i` stands for the length `2^i·d / (2hL·p)`; estimates are kept as
//! numerators `2^i·d` over the denominator `2hL·p`.

use super::shortcut::ShortcutGraph;
use super::AlgoError;
use crate::graph::{hop_bounded_paths, Adjacency, HopDistance, NodeId};

fn ceil_log2_wide(x: u128) -> u32 {
    if x <= 1 {
        0
    } else {
        128 - (x - 1).leading_zeros()
    }
}

/// Denominator `2hL` of rescaled estimates (in units of `1/p`).
pub fn scale(h: u64, eps_den: u64) -> u64 {
    2 * h * eps_den
}

/// `⌈2hL·q / 2^level⌉`, saturating at `u64::MAX`.
pub fn round_weight(q: u64, h: u64, eps_den: u64, level: u32) -> u64 {
    let num = 2 * h as u128 * eps_den as u128 * q as u128;
    let den = 1u128 << level;
    u64::try_from(num.div_ceil(den)).unwrap_or(u64::MAX)
}

/// Largest rounded distance that qualifies: `(1 + 2/ε)·h`.
pub fn qualifying_threshold(h: u64, eps_den: u64) -> u64 {
    (1 + 2 * eps_den) * h
}

/// Highest level needed so that every `h`-hop distance over edges of weight
/// at most `w_max` has a qualifying level: `⌈log₂(h·w_max)⌉`.
pub fn max_level(h: u64, w_max: u64) -> u32 {
    ceil_log2_wide(h as u128 * w_max.max(1) as u128)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundedWeights {
    pub level: u32,
    pub h: u64,
    pub eps_den: u64,
    /// `W`, the largest unrounded numerator.
    pub max_weight: u64,
    /// `(u, v, w′_i)`, `u < v`.
    pub edges: Vec<(NodeId, NodeId, u64)>,
}

impl RoundedWeights {
    pub fn from_edges(edges: &[(NodeId, NodeId, u64)], h: u64, eps_den: u64, level: u32) -> Self {
        RoundedWeights {
            level,
            h,
            eps_den,
            max_weight: edges.iter().map(|e| e.2).max().unwrap_or(0),
            edges: edges
                .iter()
                .map(|&(u, v, q)| (u, v, round_weight(q, h, eps_den, level)))
                .collect(),
        }
    }

    /// Adjacency lists, dropping edges heavier than `cap`.
    pub fn adjacency(&self, n: usize, cap: Option<u64>) -> Adjacency {
        let mut adj: Adjacency = vec![Vec::new(); n];
        for &(u, v, w) in &self.edges {
            if cap.is_none_or(|c| w <= c) {
                adj[u].push((v, w));
                adj[v].push((u, w));
            }
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        adj
    }

    /// Estimate numerator (over `2hL·p`) for rounded distance `d`.
    pub fn rescale(&self, d: u64) -> u128 {
        (d as u128) << self.level
    }
}

/// `w′_i` over the edges of `G^k`.
pub fn round_weights(
    sg: &ShortcutGraph,
    h: u64,
    eps_den: u64,
    level: u32,
) -> Result<RoundedWeights, AlgoError> {
    if h == 0 || eps_den == 0 {
        return Err(AlgoError::InvalidParameter(
            "h and 1/ε must be positive".into(),
        ));
    }
    let top = max_level(h, sg.max_weight());
    if level > top {
        return Err(AlgoError::InvalidParameter(format!(
            "level {level} above the top level {top}"
        )));
    }
    Ok(RoundedWeights::from_edges(sg.edges(), h, eps_den, level))
}

/// Hop-bounded rescaled estimates from `source`: for every level, `h`-hop
/// distances under `w′_i`, kept where they qualify, rescaled, minimized over
/// levels. Numerators over `2hL·p`; `None` when no level qualifies.
///
/// Since each estimate is the rescaled rounded length of a path of at most
/// `h` hops, it never falls below the `h`-hop distance.
pub fn hop_bounded_estimates(
    adj: &[Vec<(NodeId, u64)>],
    source: NodeId,
    h: u64,
    eps_den: u64,
) -> Vec<Option<u128>> {
    let n = adj.len();
    let edges: Vec<(NodeId, NodeId, u64)> = adj
        .iter()
        .enumerate()
        .flat_map(|(u, row)| {
            row.iter()
                .filter(move |e| u < e.0)
                .map(move |&(v, q)| (u, v, q))
        })
        .collect();
    let w_max = edges.iter().map(|e| e.2).max().unwrap_or(1);
    let threshold = qualifying_threshold(h, eps_den);
    let mut best: Vec<Option<u128>> = vec![None; n];
    for level in 0..=max_level(h, w_max) {
        let rounded = RoundedWeights::from_edges(&edges, h, eps_den, level);
        let radj = rounded.adjacency(n, Some(threshold));
        let hops = usize::try_from(h).unwrap_or(usize::MAX);
        for (v, d) in hop_bounded_paths(&radj, source, hops)
            .into_iter()
            .enumerate()
        {
            if let HopDistance::Finite(d) = d {
                if d <= threshold {
                    let cand = rounded.rescale(d);
                    if best[v].is_none_or(|b| cand < b) {
                        best[v] = Some(cand);
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::{BigInt, BigRational, Integer};

    #[test]
    fn direct_evaluation() {
        // w = 5 with p = 1, h = 4, ε = 1/2, level 3
        assert_eq!(round_weight(5, 4, 2, 3), 10);
        // large level floors at 1
        assert_eq!(round_weight(5, 4, 2, 20), 1);
        assert_eq!(qualifying_threshold(4, 2), 20);
        assert_eq!(max_level(4, 5), 5);
        assert_eq!(scale(4, 2), 16);
    }

    #[test]
    fn matches_big_rational_formula() {
        for q in 1..40u64 {
            for p in [1u64, 2, 3, 7, 16] {
                for (h, l) in [(1u64, 1u64), (3, 2), (8, 3), (12, 5)] {
                    for level in 0..12u32 {
                        // 2h·w / (ε·D′) with w = q/p, ε = 1/l, D′ = 2^level / p
                        let w = BigRational::new(BigInt::from(q), BigInt::from(p));
                        let eps = BigRational::new(BigInt::from(1), BigInt::from(l));
                        let d = BigRational::new(BigInt::from(1u64 << level), BigInt::from(p));
                        let x = BigRational::from_integer(BigInt::from(2 * h)) * w / (eps * d);
                        let ceil = x.numer().div_ceil(x.denom());
                        assert_eq!(BigInt::from(round_weight(q, h, l, level)), ceil);
                    }
                }
            }
        }
    }

    #[test]
    fn single_edge_sandwich() {
        // one edge of weight 5/1, h = 1, ε = 1/2
        let adj = vec![vec![(1, 5)], vec![(0, 5)]];
        let est = hop_bounded_estimates(&adj, 0, 1, 2);
        assert_eq!(est[0], Some(0));
        let e = est[1].unwrap();
        let s = scale(1, 2) as u128;
        assert!(e >= 5 * s && 2 * e <= 3 * 5 * s);
    }

    #[test]
    fn hop_budget_is_respected() {
        // path 0-1-2, weights 1: with h = 1 node 2 is out of reach
        let adj = vec![vec![(1, 1)], vec![(0, 1), (2, 1)], vec![(1, 1)]];
        let est = hop_bounded_estimates(&adj, 0, 1, 1);
        assert!(est[1].is_some());
        assert_eq!(est[2], None);
    }
}
