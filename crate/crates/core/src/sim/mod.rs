//! Deterministic round-synchronous execution engine.
//!
//! Each round every running node may broadcast one [`Payload`]; all payloads
//! sent in round `t` are delivered before any node acts in round `t + 1`.
//! Under [`Mode::Congest`] a broadcast reaches the sender's neighbors in the
//! communication graph; under [`Mode::Bcc`] it reaches every other node.
//! Local computation is free: only communication rounds are counted.

mod payload;
mod trace;

pub use payload::{bits_for, default_bandwidth, Codec, Payload};
pub use trace::{BroadcastRecord, CutTraffic, SimulationTrace};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::graph::{NodeId, WeightedGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("expected {expected} node programs, got {found}")]
    ProgramCount { expected: usize, found: usize },
    #[error(
        "payload of {bits} bits exceeds the {limit}-bit budget (node {node:?}, round {round:?})"
    )]
    MessageTooLarge {
        node: Option<NodeId>,
        round: Option<usize>,
        bits: u32,
        limit: u32,
    },
    #[error("malformed bit string: {0}")]
    MalformedBits(String),
    #[error("round limit {0} reached before all programs halted")]
    RoundLimitExceeded(usize),
    #[error("partition must be a non-empty proper subset of the {0} nodes")]
    InvalidPartition(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Congest,
    Bcc,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mode: Mode,
    /// Bits per message (`B`).
    pub bandwidth: u32,
    pub max_rounds: usize,
    pub codec: Codec,
    pub execution: Execution,
}

impl SimConfig {
    /// Config with the default `B` for an `n`-node network with denominator `p`.
    pub fn new(mode: Mode, n: usize, p: u64) -> Self {
        SimConfig {
            mode,
            bandwidth: default_bandwidth(n, p),
            max_rounds: 10_000_000,
            codec: Codec::new(n, p),
            execution: Execution::default(),
        }
    }

    pub fn with_bandwidth(mut self, bits: u32) -> Self {
        self.bandwidth = bits;
        self
    }

    pub fn with_max_rounds(mut self, rounds: usize) -> Self {
        self.max_rounds = rounds;
        self
    }

    pub fn with_codec(mut self, codec: Codec) -> Self {
        self.codec = codec;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    fn validate(&self, n: usize) -> Result<(), SimError> {
        if self.max_rounds == 0 {
            return Err(SimError::InvalidConfig(
                "max_rounds must be positive".into(),
            ));
        }
        let triple = Payload::Edge {
            u: n.saturating_sub(1),
            v: n.saturating_sub(1),
            weight: 0,
        };
        let need = self.codec.size(&triple);
        if self.bandwidth < need {
            return Err(SimError::InvalidConfig(format!(
                "B = {} cannot carry an edge record ({need} bits)",
                self.bandwidth
            )));
        }
        Ok(())
    }
}

/// Messages delivered to one node in one round, ordered by sender ID.
#[derive(Copy, Clone)]
pub struct Inbox<'a> {
    receiver: NodeId,
    messages: &'a [(NodeId, Payload)],
    /// Adjacency row of the receiver under CONGEST; `None` under BCC.
    neighbors: Option<&'a [bool]>,
}

impl<'a> Inbox<'a> {
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &'a Payload)> + 'a {
        let receiver = self.receiver;
        let neighbors = self.neighbors;
        self.messages
            .iter()
            .filter(move |(from, _)| *from != receiver && neighbors.is_none_or(|row| row[*from]))
            .map(|(from, msg)| (*from, msg))
    }

    pub fn is_empty(&self) -> bool {
        self.iter().next().is_none()
    }
}

/// Behavior of a single node.
///
/// A transition may only depend on the node's own state (which includes its
/// ID and whatever it was told at construction) and on received messages.
pub trait NodeProgram: Send {
    type Output: Send;

    /// Payload to broadcast in communication round `round` (1-based).
    fn send(&mut self, round: usize) -> Option<Payload>;

    /// Consumes the messages delivered at the end of `round`.
    fn receive(&mut self, round: usize, inbox: Inbox<'_>);

    fn halted(&self) -> bool;

    fn finish(self) -> Self::Output;
}

/// Runs one program per node until every program has halted.
pub fn run<P: NodeProgram>(
    mut programs: Vec<P>,
    comm: &WeightedGraph,
    config: &SimConfig,
) -> Result<SimulationTrace<P::Output>, SimError> {
    let n = comm.n();
    if programs.len() != n {
        return Err(SimError::ProgramCount {
            expected: n,
            found: programs.len(),
        });
    }
    config.validate(n)?;
    let adjacency: Option<Vec<bool>> = match config.mode {
        Mode::Bcc => None,
        Mode::Congest => {
            let mut dense = vec![false; n * n];
            for &(u, v, _) in comm.edges() {
                dense[u * n + v] = true;
                dense[v * n + u] = true;
            }
            Some(dense)
        }
    };
    let exec = config.execution;
    let mut per_round: Vec<Vec<BroadcastRecord>> = Vec::new();
    let mut round = 0usize;
    while !programs.iter().all(|p| p.halted()) {
        if round >= config.max_rounds {
            return Err(SimError::RoundLimitExceeded(config.max_rounds));
        }
        round += 1;
        let outgoing = exec.map_mut(&mut programs, |_, prog| {
            if prog.halted() {
                (false, None)
            } else {
                (true, prog.send(round))
            }
        });
        let mut records = Vec::new();
        let mut messages = Vec::new();
        for (node, (_, payload)) in outgoing.iter().enumerate() {
            let Some(payload) = payload else { continue };
            let bits = config.codec.size(payload);
            if config.codec.encode(payload, config.bandwidth).is_err() {
                return Err(SimError::MessageTooLarge {
                    node: Some(node),
                    round: Some(round),
                    bits,
                    limit: config.bandwidth,
                });
            }
            records.push(BroadcastRecord {
                node,
                payload: *payload,
                bits,
            });
            messages.push((node, *payload));
        }
        let messages = &messages;
        let adjacency = adjacency.as_deref();
        let active: Vec<bool> = outgoing.iter().map(|(a, _)| *a).collect();
        let active = &active;
        exec.map_mut(&mut programs, |node, prog| {
            if active[node] {
                let inbox = Inbox {
                    receiver: node,
                    messages,
                    neighbors: adjacency.map(|a| &a[node * n..(node + 1) * n]),
                };
                prog.receive(round, inbox);
            }
        });
        per_round.push(records);
    }
    let outputs = programs.into_iter().map(NodeProgram::finish).collect();
    Ok(SimulationTrace::new(
        config.mode,
        config.bandwidth,
        per_round,
        outputs,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{bfs_hops, make_graph};

    /// Halts before doing anything.
    struct Idle;

    impl NodeProgram for Idle {
        type Output = ();
        fn send(&mut self, _: usize) -> Option<Payload> {
            None
        }
        fn receive(&mut self, _: usize, _: Inbox<'_>) {}
        fn halted(&self) -> bool {
            true
        }
        fn finish(self) {}
    }

    /// Node 0 broadcasts its ID in round 1; everyone records what arrived.
    struct Hello {
        id: NodeId,
        done: bool,
        heard: Vec<(usize, NodeId, Payload)>,
    }

    impl NodeProgram for Hello {
        type Output = Vec<(usize, NodeId, Payload)>;
        fn send(&mut self, round: usize) -> Option<Payload> {
            (self.id == 0 && round == 1).then_some(Payload::Announce { node: self.id })
        }
        fn receive(&mut self, round: usize, inbox: Inbox<'_>) {
            self.heard
                .extend(inbox.iter().map(|(from, msg)| (round, from, *msg)));
            self.done = true;
        }
        fn halted(&self) -> bool {
            self.done
        }
        fn finish(self) -> Self::Output {
            self.heard
        }
    }

    /// Floods a token from node 0; records the round it first arrived.
    struct Flood {
        id: NodeId,
        horizon: usize,
        reached: Option<usize>,
        relayed: bool,
        round: usize,
    }

    impl NodeProgram for Flood {
        type Output = Option<usize>;
        fn send(&mut self, round: usize) -> Option<Payload> {
            self.round = round;
            if self.reached.is_some() && !self.relayed {
                self.relayed = true;
                return Some(Payload::Announce { node: 0 });
            }
            None
        }
        fn receive(&mut self, round: usize, inbox: Inbox<'_>) {
            if self.reached.is_none() && !inbox.is_empty() {
                self.reached = Some(round);
            }
        }
        fn halted(&self) -> bool {
            self.round >= self.horizon
        }
        fn finish(self) -> Option<usize> {
            if self.id == 0 {
                Some(0)
            } else {
                self.reached
            }
        }
    }

    fn path(n: usize) -> WeightedGraph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1)).collect();
        make_graph(n, 1, &edges).unwrap()
    }

    #[test]
    fn immediate_halt_runs_zero_rounds() {
        let g = path(2);
        let trace = run(vec![Idle, Idle], &g, &SimConfig::new(Mode::Bcc, 2, 1)).unwrap();
        assert_eq!(trace.rounds(), 0);
        assert!(trace.per_round().is_empty());
    }

    #[test]
    fn bcc_broadcast_reaches_everyone() {
        let g = path(3);
        let progs = (0..3)
            .map(|id| Hello {
                id,
                done: false,
                heard: vec![],
            })
            .collect();
        let trace = run(progs, &g, &SimConfig::new(Mode::Bcc, 3, 1)).unwrap();
        assert_eq!(trace.rounds(), 1);
        assert!(trace.outputs()[0].is_empty());
        for node in 1..3 {
            assert_eq!(
                trace.outputs()[node],
                vec![(1, 0, Payload::Announce { node: 0 })]
            );
        }
        assert_eq!(trace.recipients(&g, 0), vec![1, 2]);
    }

    #[test]
    fn congest_delivers_to_neighbors_only() {
        let g = path(3);
        let progs = (0..3)
            .map(|id| Hello {
                id,
                done: false,
                heard: vec![],
            })
            .collect();
        let trace = run(progs, &g, &SimConfig::new(Mode::Congest, 3, 1)).unwrap();
        assert_eq!(trace.outputs()[1].len(), 1);
        assert!(trace.outputs()[2].is_empty());
        assert_eq!(trace.recipients(&g, 0), vec![1]);
    }

    #[test]
    fn flood_matches_bfs_hops() {
        let g = path(5);
        let progs = (0..5)
            .map(|id| Flood {
                id,
                horizon: 6,
                reached: (id == 0).then_some(0),
                relayed: false,
                round: 0,
            })
            .collect();
        let trace = run(progs, &g, &SimConfig::new(Mode::Congest, 5, 1)).unwrap();
        let bfs = bfs_hops(g.adjacency(), 0);
        assert_eq!(trace.outputs().to_vec(), bfs);
        assert_eq!(trace.outputs()[4], Some(4));
    }

    #[test]
    fn round_limit_and_program_count() {
        let g = path(3);
        let progs = (0..3)
            .map(|id| Flood {
                id,
                horizon: 100,
                reached: None,
                relayed: false,
                round: 0,
            })
            .collect::<Vec<_>>();
        let cfg = SimConfig::new(Mode::Congest, 3, 1).with_max_rounds(5);
        assert_eq!(
            run(progs, &g, &cfg).unwrap_err(),
            SimError::RoundLimitExceeded(5)
        );
        assert!(matches!(
            run(vec![Idle], &g, &cfg),
            Err(SimError::ProgramCount {
                expected: 3,
                found: 1
            })
        ));
    }

    #[test]
    fn oversized_broadcast_fails_the_run() {
        struct Loud(bool);
        impl NodeProgram for Loud {
            type Output = ();
            fn send(&mut self, _: usize) -> Option<Payload> {
                Some(Payload::Bound { value: u64::MAX })
            }
            fn receive(&mut self, _: usize, _: Inbox<'_>) {
                self.0 = true;
            }
            fn halted(&self) -> bool {
                self.0
            }
            fn finish(self) {}
        }
        let g = path(2);
        let err = run(
            vec![Loud(false), Loud(false)],
            &g,
            &SimConfig::new(Mode::Bcc, 2, 1),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            SimError::MessageTooLarge {
                node: Some(0),
                round: Some(1),
                ..
            }
        ));
    }

    #[test]
    fn bandwidth_below_triple_is_rejected() {
        let g = path(2);
        let cfg = SimConfig::new(Mode::Bcc, 2, 1).with_bandwidth(3);
        assert!(matches!(
            run(vec![Idle, Idle], &g, &cfg),
            Err(SimError::InvalidConfig(_))
        ));
    }

    #[test]
    fn sequential_and_parallel_traces_match() {
        let g = path(6);
        let make = || {
            (0..6)
                .map(|id| Flood {
                    id,
                    horizon: 7,
                    reached: (id == 0).then_some(0),
                    relayed: false,
                    round: 0,
                })
                .collect::<Vec<_>>()
        };
        let base = SimConfig::new(Mode::Congest, 6, 1);
        let a = run(make(), &g, &base.with_execution(Execution::Sequential)).unwrap();
        let b = run(make(), &g, &base.with_execution(Execution::Parallel)).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.outputs(), b.outputs());
    }
}
