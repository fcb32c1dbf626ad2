//! `(S, H, K)`-source detection.
//!
//! Every round a node broadcasts the smallest `(distance, source)` entry of
//! its current top-`K` list that it has not yet broadcast at that distance.
//! Integer edge weights are handled by delay: an entry arriving over an edge
//! of weight `w` in round `t` becomes usable at the end of round `t + w − 1`,
//! as if it had travelled along a path of `w` unit edges.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use super::AlgoError;
use crate::exec::Execution;
use crate::graph::{shortest_paths, Adjacency, NodeId, WeightedGraph};
use crate::sim::{run, Codec, Inbox, Mode, NodeProgram, Payload, SimConfig, SimulationTrace};

/// `(distance, source)` pairs in ascending order.
pub type SourceList = Vec<(u64, NodeId)>;

#[derive(Clone, Debug)]
pub(crate) struct SourceDetector {
    horizon: u64,
    limit: usize,
    best: BTreeMap<NodeId, u64>,
    list: BTreeSet<(u64, NodeId)>,
    sent: BTreeMap<NodeId, u64>,
    /// `(usable after round, distance, source)`.
    pending: BinaryHeap<Reverse<(usize, u64, NodeId)>>,
}

impl SourceDetector {
    pub fn new(id: NodeId, is_source: bool, horizon: u64, limit: usize) -> Self {
        let mut det = SourceDetector {
            horizon,
            limit,
            best: BTreeMap::new(),
            list: BTreeSet::new(),
            sent: BTreeMap::new(),
            pending: BinaryHeap::new(),
        };
        if is_source {
            det.learn(0, id);
        }
        det
    }

    fn learn(&mut self, dist: u64, source: NodeId) {
        match self.best.get(&source) {
            Some(&d) if d <= dist => {}
            old => {
                if let Some(&d) = old {
                    self.list.remove(&(d, source));
                }
                self.best.insert(source, dist);
                self.list.insert((dist, source));
            }
        }
    }

    fn mature(&mut self, through_round: usize) {
        while let Some(&Reverse((ready, d, s))) = self.pending.peek() {
            if ready > through_round {
                break;
            }
            self.pending.pop();
            self.learn(d, s);
        }
    }

    /// Entry to broadcast in `round`.
    pub fn next_message(&mut self, round: usize) -> Option<(u64, NodeId)> {
        self.mature(round - 1);
        let pick = self
            .list
            .iter()
            .take(self.limit)
            .find(|&&(d, s)| self.sent.get(&s) != Some(&d))
            .copied();
        if let Some((d, s)) = pick {
            self.sent.insert(s, d);
        }
        pick
    }

    /// An entry heard in `round` over an edge of weight `weight`.
    pub fn receive(&mut self, round: usize, dist: u64, source: NodeId, weight: u64) {
        let d = dist.saturating_add(weight);
        if d > self.horizon || self.best.get(&source).is_some_and(|&b| b <= d) {
            return;
        }
        let ready = round + usize::try_from(weight).unwrap_or(usize::MAX - round) - 1;
        self.pending.push(Reverse((ready, d, source)));
    }

    /// The top-`K` list as known at the end of `round`.
    pub fn finish(&mut self, round: usize) -> SourceList {
        self.mature(round);
        self.list.iter().take(self.limit).copied().collect()
    }
}

/// Schedule-driven node program; `weights` are the node's incident edges
/// (sorted by neighbor) with integer weights.
struct DetectionNode {
    weights: Vec<(NodeId, u64)>,
    detector: SourceDetector,
    rounds: usize,
    done: bool,
}

impl NodeProgram for DetectionNode {
    type Output = SourceList;

    fn send(&mut self, round: usize) -> Option<Payload> {
        self.detector
            .next_message(round)
            .map(|(hops, source)| Payload::Source { hops, source })
    }

    fn receive(&mut self, round: usize, inbox: Inbox<'_>) {
        for (from, msg) in inbox.iter() {
            if let Payload::Source { hops, source } = *msg {
                if let Ok(i) = self.weights.binary_search_by_key(&from, |e| e.0) {
                    self.detector
                        .receive(round, hops, source, self.weights[i].1);
                }
            }
        }
        if round >= self.rounds {
            self.done = true;
        }
    }

    fn halted(&self) -> bool {
        self.done
    }

    fn finish(mut self) -> SourceList {
        self.detector.finish(self.rounds)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceDetection {
    pub lists: Vec<SourceList>,
    pub rounds: usize,
}

fn check_inputs(n: usize, sources: &[NodeId], h: u64, k: usize) -> Result<Vec<NodeId>, AlgoError> {
    if sources.is_empty() {
        return Err(AlgoError::InvalidParameter("source set is empty".into()));
    }
    if h == 0 || k == 0 {
        return Err(AlgoError::InvalidParameter(
            "H and K must be at least 1".into(),
        ));
    }
    if let Some(&s) = sources.iter().find(|&&s| s >= n) {
        return Err(AlgoError::NodeOutOfRange(s));
    }
    let mut s = sources.to_vec();
    s.sort_unstable();
    s.dedup();
    Ok(s)
}

#[allow(clippy::too_many_arguments)]
fn detect(
    comm: &WeightedGraph,
    adj: &Adjacency,
    sources: &[NodeId],
    h: u64,
    k: usize,
    rounds: usize,
    mode: Mode,
    exec: Execution,
) -> Result<(SourceDetection, SimulationTrace<()>), AlgoError> {
    let n = comm.n();
    let mut is_source = vec![false; n];
    for &s in sources {
        is_source[s] = true;
    }
    let programs: Vec<DetectionNode> = (0..n)
        .map(|u| DetectionNode {
            weights: adj[u].clone(),
            detector: SourceDetector::new(u, is_source[u], h, k),
            rounds,
            done: rounds == 0,
        })
        .collect();
    let codec = Codec::new(n, comm.p()).with_count_limit(h);
    let bandwidth = crate::sim::default_bandwidth(n, comm.p()).max(codec.size(&Payload::Source {
        hops: h,
        source: n - 1,
    }));
    let config = SimConfig::new(mode, n, comm.p())
        .with_codec(codec)
        .with_bandwidth(bandwidth)
        .with_execution(exec);
    let trace = run(programs, comm, &config)?;
    let mut lists = Vec::new();
    let trace = trace.map_outputs(|outs| {
        lists = outs;
        vec![(); n]
    });
    Ok((
        SourceDetection {
            lists,
            rounds: trace.rounds(),
        },
        trace,
    ))
}

/// Unweighted source detection over the hop structure of `g` in CONGEST
/// mode, scheduled for `min(H, D) + min(K, |S|)` rounds with `D` the hop
/// diameter.
pub fn source_detection(
    g: &WeightedGraph,
    sources: &[NodeId],
    h: u64,
    k: usize,
) -> Result<(SourceDetection, SimulationTrace<()>), AlgoError> {
    source_detection_with(g, sources, h, k, Mode::Congest, Execution::default())
}

/// As [`source_detection`], in either mode. Under BCC every node still only
/// relays what it hears from its graph neighbors, so the lists and the round
/// count match the CONGEST run; only the delivery (and cut traffic) differs.
pub fn source_detection_with(
    g: &WeightedGraph,
    sources: &[NodeId],
    h: u64,
    k: usize,
    mode: Mode,
    exec: Execution,
) -> Result<(SourceDetection, SimulationTrace<()>), AlgoError> {
    let sources = check_inputs(g.n(), sources, h, k)?;
    let unit: Adjacency = g
        .adjacency()
        .iter()
        .map(|row| row.iter().map(|&(v, _)| (v, 1)).collect())
        .collect();
    let d = g.hop_diameter() as u64;
    let rounds = h.min(d) as usize + k.min(sources.len());
    detect(g, &unit, &sources, h, k, rounds, mode, exec)
}

/// Source detection with the numerators of `g` as integer edge lengths,
/// scheduled for `H + min(K, |S|)` rounds.
pub fn weighted_source_detection(
    g: &WeightedGraph,
    sources: &[NodeId],
    h: u64,
    k: usize,
) -> Result<(SourceDetection, SimulationTrace<()>), AlgoError> {
    let sources = check_inputs(g.n(), sources, h, k)?;
    let rounds = h as usize + k.min(sources.len());
    detect(
        g,
        g.adjacency(),
        &sources,
        h,
        k,
        rounds,
        Mode::Congest,
        Execution::default(),
    )
}

/// Dijkstra from every source, capped at `H`, top `K` per node.
pub fn source_lists_reference(
    adj: &[Vec<(NodeId, u64)>],
    sources: &[NodeId],
    h: u64,
    k: usize,
) -> Vec<SourceList> {
    let mut lists: Vec<SourceList> = vec![Vec::new(); adj.len()];
    for &s in sources {
        for (v, d) in shortest_paths(adj, s).into_iter().enumerate() {
            if let Some(d) = d.filter(|&d| d <= h) {
                lists[v].push((d, s));
            }
        }
    }
    for list in &mut lists {
        list.sort_unstable();
        list.dedup();
        list.truncate(k);
    }
    lists
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::make_graph;

    fn path(n: usize) -> WeightedGraph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1)).collect();
        make_graph(n, 1, &edges).unwrap()
    }

    #[test]
    fn path_two_sources() {
        let (res, trace) = source_detection(&path(5), &[0, 4], 4, 2).unwrap();
        assert_eq!(res.lists[2], vec![(2, 0), (2, 4)]);
        assert!(trace.rounds() <= 4 + 2);
        assert_eq!(trace.mode(), Mode::Congest);
    }

    #[test]
    fn single_source_is_bfs() {
        let g = path(6);
        let (res, _) = source_detection(&g, &[2], 10, 1).unwrap();
        for (v, list) in res.lists.iter().enumerate() {
            assert_eq!(list, &vec![((v as i64 - 2).unsigned_abs(), 2)]);
        }
    }

    #[test]
    fn equidistant_sources_prefer_smaller_id() {
        let g = make_graph(3, 1, &[(0, 1, 1), (1, 2, 1)]).unwrap();
        let (res, _) = source_detection(&g, &[2, 0], 2, 1).unwrap();
        assert_eq!(res.lists[1], vec![(1, 0)]);
    }

    #[test]
    fn delayed_edge() {
        let g = make_graph(2, 2, &[(0, 1, 3)]).unwrap();
        let (res, trace) = weighted_source_detection(&g, &[0], 3, 1).unwrap();
        assert_eq!(res.lists[1], vec![(3, 0)]);
        assert_eq!(trace.rounds(), 4);
        // the entry is not usable before the end of round 3
        let mut det = SourceDetector::new(1, false, 3, 1);
        det.receive(1, 0, 0, 3);
        assert_eq!(det.finish(2), vec![]);
        assert_eq!(det.finish(3), vec![(3, 0)]);
    }

    #[test]
    fn unit_weights_match_unweighted() {
        let g = make_graph(4, 1, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)]).unwrap();
        let (a, _) = source_detection(&g, &[0, 2], 3, 2).unwrap();
        let (b, _) = weighted_source_detection(&g, &[0, 2], 3, 2).unwrap();
        assert_eq!(a.lists, b.lists);
    }

    #[test]
    fn invalid_inputs() {
        let g = path(3);
        assert!(source_detection(&g, &[], 1, 1).is_err());
        assert!(source_detection(&g, &[0], 0, 1).is_err());
        assert!(source_detection(&g, &[5], 1, 1).is_err());
    }

    #[test]
    fn bcc_delivery_gives_the_same_lists() {
        let g = path(6);
        let (c, _) = source_detection(&g, &[1, 5], 6, 2).unwrap();
        let (b, trace) =
            source_detection_with(&g, &[1, 5], 6, 2, Mode::Bcc, Execution::Sequential).unwrap();
        assert_eq!(b, c);
        assert_eq!(trace.mode(), Mode::Bcc);
    }
}
