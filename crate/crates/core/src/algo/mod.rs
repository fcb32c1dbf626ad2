//! Distributed algorithms, each paired with a local reference routine.

mod apsp;
mod hitting_set;
mod mssp;
mod neighborhood;
mod rounding;
mod shortcut;
mod source_detection;

pub use apsp::{
    apsp_approx, apsp_approx_with, apsp_reference, diameter_estimate, ApproxDistanceMatrix,
    ApspOptions, ApspOutcome, ApspParams, BoundCheck, Provenance,
};
pub use hitting_set::{
    greedy_hitting_set, hitting_set_distributed, hitting_set_distributed_with,
    hitting_set_reference, is_hitting_set, HittingSetResult,
};
pub use mssp::{
    mssp_approx, mssp_approx_with, mssp_reference, HopHorizon, MsspEstimates, MsspPlan,
};
pub use neighborhood::NeighborhoodTable;
pub use rounding::{
    hop_bounded_estimates, max_level, qualifying_threshold, round_weight, round_weights, scale,
    RoundedWeights,
};
pub use shortcut::{build_shortcut_graph, ShortcutGraph};
pub use source_detection::{
    source_detection, source_detection_with, source_lists_reference, weighted_source_detection,
    SourceDetection, SourceList,
};

use thiserror::Error;

use crate::graph::{GraphError, NodeId};
use crate::sim::SimError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgoError {
    #[error("k = {k} exceeds node count {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("set {0} of the family is empty")]
    EmptySetInFamily(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("node {0} out of range")]
    NodeOutOfRange(NodeId),
    #[error("nodes disagree on a value every node computes locally: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Smallest `c` with `2^c ≥ x` (`x ≥ 1`).
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// `⌈√x⌉` in integers.
pub fn ceil_sqrt(x: u64) -> u64 {
    let mut r = (x as f64).sqrt() as u64;
    while r * r > x {
        r -= 1;
    }
    while r * r < x {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_helpers() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(16), 4);
        assert_eq!(ceil_log2(17), 5);
        assert_eq!(ceil_sqrt(0), 0);
        assert_eq!(ceil_sqrt(1), 1);
        assert_eq!(ceil_sqrt(15), 4);
        assert_eq!(ceil_sqrt(16), 4);
        assert_eq!(ceil_sqrt(17), 5);
        for x in 0..2000u64 {
            let r = ceil_sqrt(x);
            assert!(r * r >= x && (r == 0 || (r - 1) * (r - 1) < x));
        }
    }
}
