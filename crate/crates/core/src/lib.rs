//! Round-synchronous simulation of the CONGEST and broadcast congested
//! clique (BCC) models, with deterministic distributed algorithms for
//! `k`-hitting sets, source detection, hop-bounded multi-source shortest
//! paths and `(2+o(1))`-approximate all-pairs shortest paths, plus the
//! set-disjointness diameter gadget and cut-bandwidth auditing.
//!
//! Distances are exact throughout: edge weights are `q / p` with a shared
//! denominator and all comparisons happen on integer numerators.

pub mod algo;
pub mod exec;
pub mod graph;
pub mod lowerbound;
pub mod random;
pub mod sim;

pub use exec::Execution;
pub use graph::{
    dijkstra, exact_apsp, exact_diameter, h_hop_distance, k_closest, make_graph, DistanceMatrix,
    GraphError, HopDistance, NodeId, Weight, WeightedGraph,
};
pub use sim::{run, Mode, NodeProgram, Payload, SimConfig, SimError, SimulationTrace};
