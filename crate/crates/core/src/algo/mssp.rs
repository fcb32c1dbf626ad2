//! Approximate `h`-hop distances from a hub set over `G^k`: one weighted
//! source detection per rounding level, rescaled and minimized over the
//! levels where the rounded distance qualifies.

use serde::Serialize;

use super::rounding::{max_level, qualifying_threshold, scale, RoundedWeights};
use super::shortcut::ShortcutGraph;
use super::source_detection::SourceDetector;
use super::AlgoError;
use crate::exec::Execution;
use crate::graph::{shortest_paths, NodeId};
use crate::sim::{
    default_bandwidth, run, Codec, Inbox, Mode, NodeProgram, Payload, SimConfig, SimulationTrace,
};

/// Hop horizon of each per-level source detection.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HopHorizon {
    /// `H = (1 + 2/ε)·h`, running `H + |R|` rounds per level.
    #[default]
    Qualifying,
    /// `H = h`, running `h + |R| + 1` rounds per level.
    Listing,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MsspPlan {
    pub h: u64,
    pub eps_den: u64,
    pub top_level: u32,
    /// Detection horizon per level.
    pub horizon: u64,
    /// Rounded distances above this do not qualify.
    pub threshold: u64,
    pub rounds_per_level: usize,
}

impl MsspPlan {
    pub fn new(h: u64, eps_den: u64, w_max: u64, hubs: usize, mode: HopHorizon) -> Self {
        let threshold = qualifying_threshold(h, eps_den);
        let (horizon, rounds_per_level) = match mode {
            HopHorizon::Qualifying => (threshold, threshold as usize + hubs),
            HopHorizon::Listing => (h, h as usize + hubs + 1),
        };
        MsspPlan {
            h,
            eps_den,
            top_level: max_level(h, w_max),
            horizon,
            threshold,
            rounds_per_level,
        }
    }

    pub fn levels(&self) -> u32 {
        self.top_level + 1
    }

    pub fn rounds(&self) -> usize {
        self.levels() as usize * self.rounds_per_level
    }

    /// `2hL`; estimates are numerators over `scale()·p`.
    pub fn scale(&self) -> u64 {
        scale(self.h, self.eps_den)
    }
}

/// Best qualifying `(estimate, level, rounded distance)` per hub.
pub(crate) type HubEstimate = Option<(u128, u32, u64)>;

/// Node-local MSSP state. Rounds are numbered from 1 within the phase.
#[derive(Clone, Debug)]
pub(crate) struct MsspState {
    id: NodeId,
    plan: MsspPlan,
    hubs: Vec<NodeId>,
    edges: Vec<(NodeId, u64)>,
    level: u32,
    rounded: Vec<(NodeId, u64)>,
    detector: SourceDetector,
    best: Vec<HubEstimate>,
}

impl MsspState {
    /// `hubs` sorted; `edges` are `id`'s `G^k` edges with `w′`, sorted by neighbor.
    pub fn new(id: NodeId, plan: MsspPlan, hubs: Vec<NodeId>, edges: Vec<(NodeId, u64)>) -> Self {
        let best = vec![None; hubs.len()];
        let detector = SourceDetector::new(id, false, 0, 0);
        let mut state = MsspState {
            id,
            plan,
            hubs,
            edges,
            level: 0,
            rounded: Vec::new(),
            detector,
            best,
        };
        state.start_level(0);
        state
    }

    fn start_level(&mut self, level: u32) {
        let (h, l, cap) = (self.plan.h, self.plan.eps_den, self.plan.horizon);
        self.level = level;
        self.rounded = self
            .edges
            .iter()
            .map(|&(v, q)| (v, super::rounding::round_weight(q, h, l, level)))
            .filter(|&(_, w)| w <= cap)
            .collect();
        let is_hub = self.hubs.binary_search(&self.id).is_ok();
        self.detector = SourceDetector::new(self.id, is_hub, cap, self.hubs.len());
    }

    fn local(&self, t: usize) -> usize {
        (t - 1) % self.plan.rounds_per_level + 1
    }

    pub fn send(&mut self, t: usize) -> Option<Payload> {
        let local = self.local(t);
        self.detector
            .next_message(local)
            .map(|(hops, source)| Payload::Source { hops, source })
    }

    pub fn receive(&mut self, t: usize, inbox: Inbox<'_>) {
        let local = self.local(t);
        for (from, msg) in inbox.iter() {
            if let Payload::Source { hops, source } = *msg {
                if let Ok(i) = self.rounded.binary_search_by_key(&from, |e| e.0) {
                    self.detector
                        .receive(local, hops, source, self.rounded[i].1);
                }
            }
        }
        if local == self.plan.rounds_per_level {
            for (d, s) in self.detector.finish(local) {
                if d > self.plan.threshold {
                    continue;
                }
                let value = (d as u128) << self.level;
                let j = self.hubs.binary_search(&s).expect("only hubs are sources");
                if self.best[j].is_none_or(|(b, _, _)| value < b) {
                    self.best[j] = Some((value, self.level, d));
                }
            }
            if self.level < self.plan.top_level {
                self.start_level(self.level + 1);
            }
        }
    }

    pub fn estimates(&self) -> &[HubEstimate] {
        &self.best
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MsspEstimates {
    pub plan: MsspPlan,
    pub p: u64,
    pub hubs: Vec<NodeId>,
    /// `values[u][j]`: estimate numerator for `(u, hubs[j])` over `plan.scale()·p`.
    pub values: Vec<Vec<Option<u128>>>,
    pub rounds: usize,
}

impl MsspEstimates {
    pub fn get(&self, u: NodeId, hub: NodeId) -> Option<u128> {
        let j = self.hubs.binary_search(&hub).ok()?;
        self.values[u][j]
    }
}

struct MsspNode {
    state: MsspState,
    rounds: usize,
    done: bool,
}

impl NodeProgram for MsspNode {
    type Output = Vec<HubEstimate>;

    fn send(&mut self, round: usize) -> Option<Payload> {
        self.state.send(round)
    }

    fn receive(&mut self, round: usize, inbox: Inbox<'_>) {
        self.state.receive(round, inbox);
        self.done = round >= self.rounds;
    }

    fn halted(&self) -> bool {
        self.done
    }

    fn finish(self) -> Vec<HubEstimate> {
        self.state.best
    }
}

fn check_hubs(n: usize, hubs: &[NodeId]) -> Result<Vec<NodeId>, AlgoError> {
    if hubs.is_empty() {
        return Err(AlgoError::InvalidParameter("hub set is empty".into()));
    }
    if let Some(&r) = hubs.iter().find(|&&r| r >= n) {
        return Err(AlgoError::NodeOutOfRange(r));
    }
    let mut h = hubs.to_vec();
    h.sort_unstable();
    h.dedup();
    Ok(h)
}

/// Codec and bandwidth wide enough for the counters of `plan`.
pub(crate) fn codec_for(n: usize, p: u64, plan: &MsspPlan) -> (Codec, u32) {
    let codec = Codec::new(n, p).with_count_limit(plan.horizon.max(plan.threshold));
    (codec, default_bandwidth(n, p).max(codec.max_payload_bits()))
}

/// Runs the per-level detections in BCC mode with `K = |R|` and the
/// qualifying horizon.
pub fn mssp_approx(
    sg: &ShortcutGraph,
    hubs: &[NodeId],
    h: u64,
    eps_den: u64,
) -> Result<(MsspEstimates, SimulationTrace<()>), AlgoError> {
    if h == 0 || eps_den == 0 {
        return Err(AlgoError::InvalidParameter(
            "h and 1/ε must be positive".into(),
        ));
    }
    let hubs = check_hubs(sg.n(), hubs)?;
    let plan = MsspPlan::new(
        h,
        eps_den,
        sg.max_weight(),
        hubs.len(),
        HopHorizon::Qualifying,
    );
    mssp_approx_with(sg, &hubs, plan, Execution::default())
}

pub fn mssp_approx_with(
    sg: &ShortcutGraph,
    hubs: &[NodeId],
    plan: MsspPlan,
    exec: Execution,
) -> Result<(MsspEstimates, SimulationTrace<()>), AlgoError> {
    let hubs = check_hubs(sg.n(), hubs)?;
    let n = sg.n();
    let rounds = plan.rounds();
    let programs: Vec<MsspNode> = (0..n)
        .map(|u| MsspNode {
            state: MsspState::new(u, plan, hubs.clone(), sg.adjacency()[u].clone()),
            rounds,
            done: false,
        })
        .collect();
    let (codec, bandwidth) = codec_for(n, sg.p(), &plan);
    let config = SimConfig::new(Mode::Bcc, n, sg.p())
        .with_codec(codec)
        .with_bandwidth(bandwidth)
        .with_execution(exec);
    let trace = run(programs, sg.base(), &config)?;
    let mut outs = Vec::new();
    let trace = trace.map_outputs(|o| {
        outs = o;
        vec![(); n]
    });
    let values = outs
        .into_iter()
        .map(|row| row.into_iter().map(|e| e.map(|(v, _, _)| v)).collect())
        .collect();
    Ok((
        MsspEstimates {
            plan,
            p: sg.p(),
            hubs,
            values,
            rounds: trace.rounds(),
        },
        trace,
    ))
}

/// Local counterpart: Dijkstra per level over `w′_i` capped at the horizon.
pub fn mssp_reference(
    sg: &ShortcutGraph,
    hubs: &[NodeId],
    plan: MsspPlan,
) -> Result<MsspEstimates, AlgoError> {
    let hubs = check_hubs(sg.n(), hubs)?;
    let n = sg.n();
    let mut values = vec![vec![None::<u128>; hubs.len()]; n];
    for level in 0..=plan.top_level {
        let rounded = RoundedWeights::from_edges(sg.edges(), plan.h, plan.eps_den, level);
        let adj = rounded.adjacency(n, Some(plan.horizon));
        for (j, &r) in hubs.iter().enumerate() {
            for (u, d) in shortest_paths(&adj, r).into_iter().enumerate() {
                let Some(d) = d else { continue };
                if d > plan.horizon || d > plan.threshold {
                    continue;
                }
                let value = rounded.rescale(d);
                if values[u][j].is_none_or(|b| value < b) {
                    values[u][j] = Some(value);
                }
            }
        }
    }
    Ok(MsspEstimates {
        plan,
        p: sg.p(),
        hubs,
        values,
        rounds: plan.rounds(),
    })
}
