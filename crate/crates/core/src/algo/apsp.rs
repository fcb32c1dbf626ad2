//! Approximate APSP in the broadcast congested clique.
//!
//! Schedule, with `k = min(⌈√n⌉, n)`:
//! 1. rounds `1..=2k`: `S^k` discovery; every node then knows every `S^k`
//!    list, its own `G^k` edges and the greedy hitting set `R`;
//! 2. one round broadcasting the largest incident `w′`, giving `W`;
//! 3. per rounding level, weighted source detection from `R` on `G^k`;
//! 4. `|R|` rounds in which every node broadcasts its estimate to each hub.
//!
//! Node `u` then sets `d̃(u, v) = min(w′(u, v), min_r d′(u, r) + d′(v, r))`.

use serde::Serialize;

use super::hitting_set::greedy_hitting_set;
use super::mssp::{codec_for, mssp_reference, HubEstimate, MsspPlan, MsspState};
use super::neighborhood::{NeighborhoodPhase, NeighborhoodTable};
use super::shortcut::ShortcutGraph;
use super::{ceil_log2, ceil_sqrt, AlgoError, HopHorizon};
use crate::exec::Execution;
use crate::graph::{DistanceMatrix, NodeId, Weight, WeightedGraph};
use crate::sim::{run, Inbox, Mode, NodeProgram, Payload, SimConfig, SimulationTrace};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ApspParams {
    pub n: usize,
    pub k: usize,
    pub h: u64,
    /// `L` with `ε = 1/L`.
    pub eps_den: u64,
}

impl ApspParams {
    /// `k = min(⌈√n⌉, n)`, `h = 4⌈√n⌉`, `ε = 1/⌈log₂ n⌉` (at least `1/1`).
    pub fn for_n(n: usize) -> Self {
        let root = ceil_sqrt(n as u64);
        ApspParams {
            n,
            k: (root as usize).min(n),
            h: 4 * root,
            eps_den: u64::from(ceil_log2(n as u64)).max(1),
        }
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct ApspOptions {
    pub horizon: HopHorizon,
    /// Overrides the computed message size.
    pub bandwidth: Option<u32>,
    pub execution: Execution,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    Diagonal,
    /// The shortcut assignment `w′(u, v)`.
    Shortcut,
    ViaHub {
        hub: NodeId,
    },
}

/// Estimates as numerators over the shared denominator `scale·p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ApproxDistanceMatrix {
    n: usize,
    p: u64,
    scale: u64,
    values: Vec<u128>,
    provenance: Vec<Provenance>,
}

/// Comparison of an estimate matrix against exact distances.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundCheck {
    /// `d ≤ d̃` everywhere.
    pub lower_ok: bool,
    /// `d̃ ≤ 2(1+ε)²·d` everywhere.
    pub upper_ok: bool,
    pub symmetric: bool,
    pub zero_diagonal: bool,
    /// Largest `d̃ / d` as an exact fraction.
    pub max_ratio_num: u128,
    pub max_ratio_den: u128,
    pub worst_pair: Option<(NodeId, NodeId)>,
}

impl BoundCheck {
    pub fn valid(&self) -> bool {
        self.lower_ok && self.upper_ok && self.symmetric && self.zero_diagonal
    }

    pub fn max_ratio(&self) -> f64 {
        self.max_ratio_num as f64 / self.max_ratio_den as f64
    }

    pub fn max_ratio_milli(&self) -> u128 {
        self.max_ratio_num * 1000 / self.max_ratio_den
    }
}

impl ApproxDistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    /// Shared denominator of all entries.
    pub fn denominator(&self) -> u128 {
        self.scale as u128 * self.p as u128
    }

    pub fn get(&self, u: NodeId, v: NodeId) -> u128 {
        self.values[u * self.n + v]
    }

    pub fn provenance(&self, u: NodeId, v: NodeId) -> Provenance {
        self.provenance[u * self.n + v]
    }

    pub fn as_f64(&self, u: NodeId, v: NodeId) -> f64 {
        self.get(u, v) as f64 / self.denominator() as f64
    }

    /// `⌊1000·d̃/d⌋`, with `1000` on the diagonal.
    pub fn ratio_milli(&self, exact: &DistanceMatrix, u: NodeId, v: NodeId) -> u128 {
        let d = exact.get(u, v) as u128 * self.scale as u128;
        (self.get(u, v) * 1000).checked_div(d).unwrap_or(1000)
    }

    /// Checks `d ≤ d̃ ≤ 2(1+ε)²·d`, symmetry and the zero diagonal against
    /// `exact` (same denominator `p`), all in integers.
    pub fn check_against(&self, exact: &DistanceMatrix, eps_den: u64) -> BoundCheck {
        assert_eq!(exact.n(), self.n);
        assert_eq!(exact.p(), self.p);
        let l = eps_den as u128;
        let s = self.scale as u128;
        let mut check = BoundCheck {
            lower_ok: true,
            upper_ok: true,
            symmetric: true,
            zero_diagonal: true,
            max_ratio_num: 1,
            max_ratio_den: 1,
            worst_pair: None,
        };
        for u in 0..self.n {
            check.zero_diagonal &= self.get(u, u) == 0;
            for v in 0..self.n {
                check.symmetric &= self.get(u, v) == self.get(v, u);
                if u == v {
                    continue;
                }
                let est = self.get(u, v);
                let d = exact.get(u, v) as u128 * s;
                check.lower_ok &= est >= d;
                check.upper_ok &= est * l * l <= 2 * (l + 1) * (l + 1) * d;
                if est * check.max_ratio_den > check.max_ratio_num * d {
                    check.max_ratio_num = est;
                    check.max_ratio_den = d;
                    check.worst_pair = Some((u, v));
                }
            }
        }
        check
    }
}

/// Largest estimate, as a rational over `scale·p`.
pub fn diameter_estimate(m: &ApproxDistanceMatrix) -> Weight {
    let max = m.values.iter().copied().max().unwrap_or(0);
    Weight::new(
        u64::try_from(max).expect("estimate fits in 64 bits"),
        u64::try_from(m.denominator()).expect("denominator fits in 64 bits"),
    )
}

/// `d̃(u, ·)` from the shortcut assignment and the hub estimates.
fn combine_row(
    u: NodeId,
    n: usize,
    scale: u64,
    hubs: &[NodeId],
    shortcut: impl Fn(NodeId) -> Option<u64>,
    hub_estimate: impl Fn(NodeId, usize) -> Option<u128>,
) -> Vec<(Option<u128>, Provenance)> {
    (0..n)
        .map(|v| {
            if v == u {
                return (Some(0), Provenance::Diagonal);
            }
            let mut via: Option<(u128, NodeId)> = None;
            for (j, &r) in hubs.iter().enumerate() {
                if let (Some(a), Some(b)) = (hub_estimate(u, j), hub_estimate(v, j)) {
                    if via.is_none_or(|(best, _)| a + b < best) {
                        via = Some((a + b, r));
                    }
                }
            }
            let direct = shortcut(v).map(|w| w as u128 * scale as u128);
            match (direct, via) {
                (Some(d), Some((x, _))) if d <= x => (Some(d), Provenance::Shortcut),
                (_, Some((x, hub))) => (Some(x), Provenance::ViaHub { hub }),
                (Some(d), None) => (Some(d), Provenance::Shortcut),
                (None, None) => (None, Provenance::Shortcut),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ApspOutcome {
    pub matrix: ApproxDistanceMatrix,
    pub params: ApspParams,
    pub plan: MsspPlan,
    pub hitting_set: Vec<NodeId>,
    pub bandwidth: u32,
    pub rounds: usize,
}

struct NodeOutput {
    row: Vec<(Option<u128>, Provenance)>,
    hubs: Vec<NodeId>,
    plan: Option<MsspPlan>,
}

struct ApspNode {
    id: NodeId,
    n: usize,
    params: ApspParams,
    horizon: HopHorizon,
    own: Vec<(NodeId, u64)>,
    phase: Option<NeighborhoodPhase>,
    table: Option<NeighborhoodTable>,
    incident: Vec<(NodeId, u64)>,
    hubs: Vec<NodeId>,
    w_max: u64,
    plan: Option<MsspPlan>,
    mssp: Option<MsspState>,
    /// `hub_table[v][j]`: `v`'s estimate to `hubs[j]`.
    hub_table: Vec<Vec<Option<u128>>>,
    row: Vec<(Option<u128>, Provenance)>,
    done: bool,
}

impl ApspNode {
    fn new(g: &WeightedGraph, id: NodeId, params: ApspParams, horizon: HopHorizon) -> Self {
        ApspNode {
            id,
            n: g.n(),
            params,
            horizon,
            own: g.neighbors(id).to_vec(),
            phase: Some(NeighborhoodPhase::new(id, g.n(), params.k, g.neighbors(id))),
            table: None,
            incident: Vec::new(),
            hubs: Vec::new(),
            w_max: 0,
            plan: None,
            mssp: None,
            hub_table: Vec::new(),
            row: Vec::new(),
            done: false,
        }
    }

    fn bound_round(&self) -> usize {
        2 * self.params.k + 1
    }

    fn mssp_rounds(&self) -> usize {
        self.plan.map_or(0, |p| p.rounds())
    }

    /// Index of the hub broadcast in `round`, if it is one.
    fn hub_slot(&self, round: usize) -> Option<usize> {
        let start = self.bound_round() + self.mssp_rounds();
        (round > start)
            .then(|| round - start - 1)
            .filter(|&j| j < self.hubs.len())
    }

    fn own_estimate(&self, j: usize) -> HubEstimate {
        self.mssp.as_ref().and_then(|m| m.estimates()[j])
    }

    fn finish_neighborhood(&mut self) {
        let table = self.phase.take().expect("phase runs once").into_table();
        self.incident = table.incident_edges(self.id, &self.own);
        self.w_max = self.incident.iter().map(|e| e.1).max().unwrap_or(0);
        let family: Vec<Vec<NodeId>> = (0..self.n).map(|u| table.members(u)).collect();
        self.hubs = greedy_hitting_set(&family).expect("every S^k list holds its owner");
        self.hub_table = vec![vec![None; self.hubs.len()]; self.n];
        self.table = Some(table);
    }

    fn start_mssp(&mut self) {
        let p = &self.params;
        let plan = MsspPlan::new(p.h, p.eps_den, self.w_max, self.hubs.len(), self.horizon);
        self.plan = Some(plan);
        self.mssp = Some(MsspState::new(
            self.id,
            plan,
            self.hubs.clone(),
            std::mem::take(&mut self.incident),
        ));
    }

    fn finish(&mut self) {
        let table = self.table.as_ref().expect("table built");
        let own = &self.own;
        let id = self.id;
        let hub_table = &self.hub_table;
        let scale = self.plan.expect("plan built").scale();
        self.row = combine_row(
            id,
            self.n,
            scale,
            &self.hubs,
            |v| {
                let base = own.binary_search_by_key(&v, |e| e.0).ok().map(|i| own[i].1);
                table.symmetric_weight(id, v, base)
            },
            |v, j| hub_table[v][j],
        );
        self.done = true;
    }
}

impl NodeProgram for ApspNode {
    type Output = NodeOutput;

    fn send(&mut self, round: usize) -> Option<Payload> {
        if let Some(phase) = &self.phase {
            return phase.send(round);
        }
        let b = self.bound_round();
        if round == b {
            return Some(Payload::Bound { value: self.w_max });
        }
        if round <= b + self.mssp_rounds() {
            return self.mssp.as_mut().and_then(|m| m.send(round - b));
        }
        let j = self.hub_slot(round)?;
        let hub = self.hubs[j];
        Some(match self.own_estimate(j) {
            Some((_, level, rounded)) => Payload::HubDistance {
                hub,
                level,
                rounded,
            },
            None => Payload::HubUnreachable { hub },
        })
    }

    fn receive(&mut self, round: usize, inbox: Inbox<'_>) {
        if let Some(phase) = &mut self.phase {
            phase.receive(round, inbox);
            if round == phase.rounds() {
                self.finish_neighborhood();
            }
            return;
        }
        let b = self.bound_round();
        if round == b {
            for (_, msg) in inbox.iter() {
                if let Payload::Bound { value } = *msg {
                    self.w_max = self.w_max.max(value);
                }
            }
            self.start_mssp();
        } else if round <= b + self.mssp_rounds() {
            let m = self.mssp.as_mut().expect("mssp started");
            m.receive(round - b, inbox);
            if round == b + self.mssp_rounds() {
                for j in 0..self.hubs.len() {
                    self.hub_table[self.id][j] = self.own_estimate(j).map(|e| e.0);
                }
            }
        } else if let Some(j) = self.hub_slot(round) {
            for (from, msg) in inbox.iter() {
                self.hub_table[from][j] = match *msg {
                    Payload::HubDistance { level, rounded, .. } => Some((rounded as u128) << level),
                    _ => None,
                };
            }
        }
        if self.plan.is_some() && round == b + self.mssp_rounds() + self.hubs.len() {
            self.finish();
        }
    }

    fn halted(&self) -> bool {
        self.done
    }

    fn finish(self) -> NodeOutput {
        NodeOutput {
            row: self.row,
            hubs: self.hubs,
            plan: self.plan,
        }
    }
}

pub fn apsp_approx(g: &WeightedGraph) -> Result<(ApspOutcome, SimulationTrace<()>), AlgoError> {
    apsp_approx_with(g, &ApspOptions::default())
}

pub fn apsp_approx_with(
    g: &WeightedGraph,
    options: &ApspOptions,
) -> Result<(ApspOutcome, SimulationTrace<()>), AlgoError> {
    let n = g.n();
    let params = ApspParams::for_n(n);
    // counters depend only on h and ε, so any `W` gives the same codec
    let probe = MsspPlan::new(params.h, params.eps_den, 1, n, options.horizon);
    let (codec, computed) = codec_for(n, g.p(), &probe);
    let bandwidth = options.bandwidth.unwrap_or(computed);
    let config = SimConfig::new(Mode::Bcc, n, g.p())
        .with_codec(codec)
        .with_bandwidth(bandwidth)
        .with_execution(options.execution);
    let programs = (0..n)
        .map(|u| ApspNode::new(g, u, params, options.horizon))
        .collect();
    let trace = run(programs, g, &config)?;
    let mut outs = Vec::new();
    let trace = trace.map_outputs(|o| {
        outs = o;
        vec![(); n]
    });
    let hubs = outs[0].hubs.clone();
    let plan = outs[0].plan.expect("every node plans the MSSP phase");
    if outs.iter().any(|o| o.hubs != hubs || o.plan != Some(plan)) {
        return Err(AlgoError::Inconsistent(
            "hitting set or rounding plan".into(),
        ));
    }
    let mut values = Vec::with_capacity(n * n);
    let mut provenance = Vec::with_capacity(n * n);
    for (u, out) in outs.into_iter().enumerate() {
        for (v, (value, prov)) in out.row.into_iter().enumerate() {
            values.push(
                value.ok_or_else(|| {
                    AlgoError::Inconsistent(format!("no estimate for ({u}, {v})"))
                })?,
            );
            provenance.push(prov);
        }
    }
    let matrix = ApproxDistanceMatrix {
        n,
        p: g.p(),
        scale: plan.scale(),
        values,
        provenance,
    };
    Ok((
        ApspOutcome {
            matrix,
            params,
            plan,
            hitting_set: hubs,
            bandwidth,
            rounds: trace.rounds(),
        },
        trace,
    ))
}

/// Local pipeline producing the same matrix without simulation: exact
/// `S^k` lists, greedy hubs, per-level Dijkstra, same combination.
pub fn apsp_reference(g: &WeightedGraph, horizon: HopHorizon) -> Result<ApspOutcome, AlgoError> {
    let n = g.n();
    let params = ApspParams::for_n(n);
    let table = NeighborhoodTable::exact(g, params.k)?;
    let family: Vec<Vec<NodeId>> = (0..n).map(|u| table.members(u)).collect();
    let hubs = greedy_hitting_set(&family)?;
    let sg = ShortcutGraph::from_table(g.clone(), table);
    let plan = MsspPlan::new(
        params.h,
        params.eps_den,
        sg.max_weight(),
        hubs.len(),
        horizon,
    );
    let est = mssp_reference(&sg, &hubs, plan)?;
    let mut values = Vec::with_capacity(n * n);
    let mut provenance = Vec::with_capacity(n * n);
    for u in 0..n {
        let row = combine_row(
            u,
            n,
            plan.scale(),
            &hubs,
            |v| sg.assigned_weight(u, v),
            |v, j| est.values[v][j],
        );
        for (v, (value, prov)) in row.into_iter().enumerate() {
            values.push(
                value.ok_or_else(|| {
                    AlgoError::Inconsistent(format!("no estimate for ({u}, {v})"))
                })?,
            );
            provenance.push(prov);
        }
    }
    let probe = MsspPlan::new(params.h, params.eps_den, 1, n, horizon);
    let rounds = 2 * params.k + 1 + plan.rounds() + hubs.len();
    Ok(ApspOutcome {
        matrix: ApproxDistanceMatrix {
            n,
            p: g.p(),
            scale: plan.scale(),
            values,
            provenance,
        },
        params,
        plan,
        hitting_set: hubs,
        bandwidth: codec_for(n, g.p(), &probe).1,
        rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{exact_apsp, make_graph};

    #[test]
    fn params() {
        let p = ApspParams::for_n(16);
        assert_eq!((p.k, p.h, p.eps_den), (4, 16, 4));
        let p = ApspParams::for_n(2);
        assert_eq!((p.k, p.h, p.eps_den), (2, 8, 1));
        let p = ApspParams::for_n(1);
        assert_eq!((p.k, p.h, p.eps_den), (1, 4, 1));
    }

    #[test]
    fn single_edge_is_exact() {
        let g = make_graph(2, 3, &[(0, 1, 7)]).unwrap();
        let (out, trace) = apsp_approx(&g).unwrap();
        let m = &out.matrix;
        assert_eq!(m.get(0, 1), 7 * m.scale() as u128);
        assert_eq!(m.get(0, 0), 0);
        assert_eq!(diameter_estimate(m), Weight::new(7, 3));
        assert_eq!(out.rounds, trace.rounds());
        let check = m.check_against(&exact_apsp(&g), out.params.eps_den);
        assert!(check.valid());
        assert_eq!(check.max_ratio_milli(), 1000);
    }

    #[test]
    fn matches_reference_on_small_graph() {
        let edges = [
            (0, 1, 3),
            (1, 2, 1),
            (2, 3, 4),
            (3, 4, 2),
            (4, 5, 1),
            (5, 6, 3),
            (6, 7, 2),
            (7, 0, 4),
            (1, 5, 4),
            (2, 6, 1),
        ];
        let g = make_graph(8, 2, &edges).unwrap();
        let (out, trace) = apsp_approx(&g).unwrap();
        let reference = apsp_reference(&g, HopHorizon::Qualifying).unwrap();
        assert_eq!(out, reference);
        assert!(trace.check_broadcast_only());
        let check = out
            .matrix
            .check_against(&exact_apsp(&g), out.params.eps_den);
        assert!(check.lower_ok && check.symmetric && check.zero_diagonal);
    }

    #[test]
    fn single_node() {
        let g = make_graph(1, 1, &[]).unwrap();
        let (out, _) = apsp_approx(&g).unwrap();
        assert_eq!(out.matrix.get(0, 0), 0);
        assert_eq!(out.hitting_set, vec![0]);
    }
}
