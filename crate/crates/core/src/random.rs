//! Seeded generators for graphs and disjointness inputs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{GraphError, NodeId, WeightedGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("density must lie in [0, 1], got {0}")]
    InvalidDensity(f64),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected graph: a random spanning tree plus every other pair
/// with the probability that brings the expected edge count to
/// `density · n(n−1)/2`. Numerators are uniform in `1..=p²`.
pub fn random_connected_graph(
    n: usize,
    p: u64,
    density: f64,
    seed: u64,
) -> Result<WeightedGraph, GenError> {
    if !(0.0..=1.0).contains(&density) {
        return Err(GenError::InvalidDensity(density));
    }
    if n == 0 {
        return Err(GraphError::Empty.into());
    }
    let mut rng = rng(seed);
    let max_weight = p.saturating_mul(p).max(1);
    let mut order: Vec<NodeId> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut present = vec![false; n * n];
    let mut edges = Vec::new();
    for i in 1..n {
        let u = order[i];
        let v = order[rng.gen_range(0..i)];
        present[u * n + v] = true;
        present[v * n + u] = true;
        edges.push((u.min(v), u.max(v), rng.gen_range(1..=max_weight)));
    }
    let pairs = n * (n - 1) / 2;
    let extra_pairs = pairs - (n - 1);
    let target = density * pairs as f64 - (n - 1) as f64;
    let prob = if extra_pairs == 0 {
        0.0
    } else {
        (target / extra_pairs as f64).clamp(0.0, 1.0)
    };
    for u in 0..n {
        for v in u + 1..n {
            if !present[u * n + v] && rng.gen_bool(prob) {
                edges.push((u, v, rng.gen_range(1..=max_weight)));
            }
        }
    }
    Ok(WeightedGraph::new(n, p, &edges)?)
}

/// `len` uniformly random bits.
pub fn random_bits(len: usize, rng: &mut impl Rng) -> Vec<bool> {
    (0..len).map(|_| rng.gen_bool(0.5)).collect()
}
