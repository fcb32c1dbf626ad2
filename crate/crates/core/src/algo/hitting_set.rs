//! Deterministic `k`-hitting sets: greedy set cover over the `S^k` family,
//! computed locally by every node after `2k` broadcast rounds.

use serde::Serialize;

use super::neighborhood::{NeighborhoodPhase, NeighborhoodTable};
use super::AlgoError;
use crate::exec::Execution;
use crate::graph::{NodeId, WeightedGraph};
use crate::sim::{run, Inbox, Mode, NodeProgram, Payload, SimConfig, SimulationTrace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HittingSetResult {
    pub k: usize,
    /// Sorted hitting set.
    pub set: Vec<NodeId>,
    /// `family[v] = S^k(v)` in `(distance, id)` order.
    pub family: Vec<Vec<NodeId>>,
    pub rounds_used: usize,
}

/// Greedy hitting set: repeatedly picks the node contained in the most sets
/// not yet hit, ties to the smaller ID. Returns the set sorted.
pub fn greedy_hitting_set<S: AsRef<[NodeId]>>(family: &[S]) -> Result<Vec<NodeId>, AlgoError> {
    let mut universe = 0;
    for (i, set) in family.iter().enumerate() {
        let set = set.as_ref();
        if set.is_empty() {
            return Err(AlgoError::EmptySetInFamily(i));
        }
        universe = universe.max(set.iter().max().map_or(0, |&m| m + 1));
    }
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); universe];
    let mut members: Vec<Vec<NodeId>> = Vec::with_capacity(family.len());
    for (i, set) in family.iter().enumerate() {
        let mut s = set.as_ref().to_vec();
        s.sort_unstable();
        s.dedup();
        for &v in &s {
            containing[v].push(i);
        }
        members.push(s);
    }
    let mut score: Vec<usize> = containing.iter().map(Vec::len).collect();
    let mut hit = vec![false; family.len()];
    let mut remaining = family.len();
    let mut chosen = Vec::new();
    while remaining > 0 {
        let mut best = 0;
        for v in 1..universe {
            if score[v] > score[best] {
                best = v;
            }
        }
        chosen.push(best);
        for &i in &containing[best] {
            if !hit[i] {
                hit[i] = true;
                remaining -= 1;
                for &x in &members[i] {
                    score[x] -= 1;
                }
            }
        }
    }
    chosen.sort_unstable();
    Ok(chosen)
}

pub fn is_hitting_set<S: AsRef<[NodeId]>>(family: &[S], set: &[NodeId]) -> bool {
    family
        .iter()
        .all(|s| s.as_ref().iter().any(|v| set.contains(v)))
}

fn check_k(g: &WeightedGraph, k: usize) -> Result<(), AlgoError> {
    if k > g.n() {
        return Err(AlgoError::KTooLarge { k, n: g.n() });
    }
    if k == 0 {
        return Err(AlgoError::InvalidParameter("k must be at least 1".into()));
    }
    Ok(())
}

/// Local pipeline: exact `S^k` lists followed by the greedy. `rounds_used`
/// is the `2k` the distributed schedule takes.
pub fn hitting_set_reference(g: &WeightedGraph, k: usize) -> Result<HittingSetResult, AlgoError> {
    check_k(g, k)?;
    let table = NeighborhoodTable::exact(g, k)?;
    let family: Vec<Vec<NodeId>> = (0..g.n()).map(|u| table.members(u)).collect();
    let set = greedy_hitting_set(&family)?;
    Ok(HittingSetResult {
        k,
        set,
        family,
        rounds_used: 2 * k,
    })
}

struct HittingSetNode {
    phase: NeighborhoodPhase,
    done: bool,
    set: Vec<NodeId>,
}

/// What one node ends up knowing.
struct NodeView {
    closest: Vec<NodeId>,
    set: Vec<NodeId>,
}

impl NodeProgram for HittingSetNode {
    type Output = NodeView;

    fn send(&mut self, round: usize) -> Option<Payload> {
        self.phase.send(round)
    }

    fn receive(&mut self, round: usize, inbox: Inbox<'_>) {
        self.phase.receive(round, inbox);
        if round == self.phase.rounds() {
            let table = self.phase.clone().into_table();
            let family: Vec<Vec<NodeId>> = (0..table.n()).map(|u| table.members(u)).collect();
            self.set = greedy_hitting_set(&family).expect("every S^k list holds its owner");
            self.done = true;
        }
    }

    fn halted(&self) -> bool {
        self.done
    }

    fn finish(self) -> NodeView {
        NodeView {
            closest: self.phase.closest().iter().map(|e| e.0).collect(),
            set: self.set,
        }
    }
}

/// Runs the `2k`-round program in BCC mode.
pub fn hitting_set_distributed(
    g: &WeightedGraph,
    k: usize,
) -> Result<(HittingSetResult, SimulationTrace<()>), AlgoError> {
    hitting_set_distributed_with(g, k, Execution::default())
}

pub fn hitting_set_distributed_with(
    g: &WeightedGraph,
    k: usize,
    exec: Execution,
) -> Result<(HittingSetResult, SimulationTrace<()>), AlgoError> {
    check_k(g, k)?;
    let n = g.n();
    let programs: Vec<HittingSetNode> = (0..n)
        .map(|u| HittingSetNode {
            phase: NeighborhoodPhase::new(u, n, k, g.neighbors(u)),
            done: false,
            set: Vec::new(),
        })
        .collect();
    let config = SimConfig::new(Mode::Bcc, n, g.p()).with_execution(exec);
    let trace = run(programs, g, &config)?;
    let mut views = Vec::with_capacity(n);
    let trace = trace.map_outputs(|outs| {
        views = outs;
        vec![(); n]
    });
    let set = views[0].set.clone();
    if views.iter().any(|v| v.set != set) {
        return Err(AlgoError::Inconsistent("hitting set".into()));
    }
    let family = views.into_iter().map(|v| v.closest).collect();
    Ok((
        HittingSetResult {
            k,
            set,
            family,
            rounds_used: trace.rounds(),
        },
        trace,
    ))
}
