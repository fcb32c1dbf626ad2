use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Mode, Payload, SimError};
use crate::graph::{NodeId, WeightedGraph};

/// One broadcast: `node` sent `payload`, costing `bits`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BroadcastRecord {
    pub node: NodeId,
    pub payload: Payload,
    pub bits: u32,
}

/// Bits crossing a cut `(P, V∖P)` in one round, per direction.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutTraffic {
    pub round: usize,
    pub out_of_part: u64,
    pub into_part: u64,
}

impl CutTraffic {
    pub fn total(&self) -> u64 {
        self.out_of_part + self.into_part
    }
}

/// Record of a finished simulation: every broadcast of every round plus
/// the per-node outputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulationTrace<O> {
    mode: Mode,
    bandwidth: u32,
    per_round: Vec<Vec<BroadcastRecord>>,
    outputs: Vec<O>,
}

impl<O> SimulationTrace<O> {
    pub(crate) fn new(
        mode: Mode,
        bandwidth: u32,
        per_round: Vec<Vec<BroadcastRecord>>,
        outputs: Vec<O>,
    ) -> Self {
        SimulationTrace {
            mode,
            bandwidth,
            per_round,
            outputs,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn bandwidth(&self) -> u32 {
        self.bandwidth
    }

    pub fn rounds(&self) -> usize {
        self.per_round.len()
    }

    /// `per_round()[t]` holds the broadcasts of round `t + 1`, sorted by node.
    pub fn per_round(&self) -> &[Vec<BroadcastRecord>] {
        &self.per_round
    }

    pub fn outputs(&self) -> &[O] {
        &self.outputs
    }

    pub fn into_outputs(self) -> Vec<O> {
        self.outputs
    }

    /// Replaces the outputs, keeping the communication record.
    pub fn map_outputs<T>(self, f: impl FnOnce(Vec<O>) -> Vec<T>) -> SimulationTrace<T> {
        SimulationTrace {
            mode: self.mode,
            bandwidth: self.bandwidth,
            per_round: self.per_round,
            outputs: f(self.outputs),
        }
    }

    pub fn total_bits(&self) -> u64 {
        self.per_round
            .iter()
            .flatten()
            .map(|r| u64::from(r.bits))
            .sum()
    }

    pub fn round_bits(&self) -> Vec<u64> {
        self.per_round
            .iter()
            .map(|r| r.iter().map(|b| u64::from(b.bits)).sum())
            .collect()
    }

    /// Broadcast-only check: at most one payload per node per round, each
    /// within the bit budget.
    pub fn check_broadcast_only(&self) -> bool {
        self.per_round.iter().all(|round| {
            round.windows(2).all(|w| w[0].node < w[1].node)
                && round.iter().all(|r| r.bits <= self.bandwidth)
        })
    }

    /// Nodes that receive `sender`'s broadcasts.
    pub fn recipients(&self, comm: &WeightedGraph, sender: NodeId) -> Vec<NodeId> {
        match self.mode {
            Mode::Bcc => (0..comm.n()).filter(|&v| v != sender).collect(),
            Mode::Congest => comm.neighbors(sender).iter().map(|&(v, _)| v).collect(),
        }
    }

    /// Per-round bits crossing the cut between `part` (the nodes flagged
    /// `true`) and the rest. A broadcast crosses when some recipient lies on
    /// the other side and is charged once, since every recipient gets the
    /// same bits.
    pub fn cut_traffic(
        &self,
        comm: &WeightedGraph,
        part: &[bool],
    ) -> Result<Vec<CutTraffic>, SimError> {
        let n = comm.n();
        let inside = part.iter().filter(|&&b| b).count();
        if part.len() != n || inside == 0 || inside == n {
            return Err(SimError::InvalidPartition(n));
        }
        let crosses: Vec<bool> = (0..n)
            .map(|u| match self.mode {
                Mode::Bcc => true,
                Mode::Congest => comm.neighbors(u).iter().any(|&(v, _)| part[v] != part[u]),
            })
            .collect();
        Ok(self
            .per_round
            .iter()
            .enumerate()
            .map(|(t, round)| {
                let mut cut = CutTraffic {
                    round: t + 1,
                    ..Default::default()
                };
                for r in round.iter().filter(|r| crosses[r.node]) {
                    if part[r.node] {
                        cut.out_of_part += u64::from(r.bits);
                    } else {
                        cut.into_part += u64::from(r.bits);
                    }
                }
                cut
            })
            .collect())
    }

    /// `{mode, B, rounds, per_round: [[{node, kind, bits}, ...], ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let per_round: Vec<serde_json::Value> = self
            .per_round
            .iter()
            .map(|round| {
                round
                    .iter()
                    .map(|r| json!({"node": r.node, "kind": r.payload.kind(), "bits": r.bits}))
                    .collect()
            })
            .collect();
        json!({
            "mode": self.mode,
            "B": self.bandwidth,
            "rounds": self.rounds(),
            "per_round": per_round,
        })
    }

    /// CSV with columns `round,total_bits,cut_bits`; `cut_bits` counts both
    /// directions across `part`.
    pub fn summary_csv(&self, comm: &WeightedGraph, part: &[bool]) -> Result<String, SimError> {
        let cuts = self.cut_traffic(comm, part)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| SimError::InvalidConfig(e.to_string());
        w.write_record(["round", "total_bits", "cut_bits"])
            .map_err(io)?;
        for (bits, cut) in self.round_bits().into_iter().zip(cuts) {
            w.write_record([
                cut.round.to_string(),
                bits.to_string(),
                cut.total().to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::make_graph;

    fn record(node: NodeId, bits: u32) -> BroadcastRecord {
        BroadcastRecord {
            node,
            payload: Payload::Announce { node },
            bits,
        }
    }

    #[test]
    fn silent_round_has_no_cut_traffic() {
        let g = make_graph(2, 1, &[(0, 1, 1)]).unwrap();
        let t: SimulationTrace<()> = SimulationTrace::new(Mode::Bcc, 8, vec![vec![]], vec![(), ()]);
        let cut = t.cut_traffic(&g, &[true, false]).unwrap();
        assert_eq!(cut[0].total(), 0);
    }

    #[test]
    fn bcc_all_broadcast_is_n_times_b() {
        let edges: Vec<_> = (0..5).map(|i| (i, i + 1, 1)).collect();
        let g = make_graph(6, 1, &edges).unwrap();
        let b = 13;
        let round: Vec<_> = (0..6).map(|u| record(u, b)).collect();
        let t: SimulationTrace<()> = SimulationTrace::new(Mode::Bcc, b, vec![round], vec![(); 6]);
        for part in [
            vec![true, false, false, false, false, false],
            vec![true, true, true, false, false, false],
            vec![false, true, false, true, false, true],
        ] {
            let cut = t.cut_traffic(&g, &part).unwrap();
            assert_eq!(cut[0].total(), 6 * u64::from(b));
        }
    }

    #[test]
    fn congest_counts_only_boundary_senders() {
        // path 0-1-2-3, cut between 1 and 2
        let g = make_graph(4, 1, &[(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap();
        let round: Vec<_> = (0..4).map(|u| record(u, 5)).collect();
        let t: SimulationTrace<()> =
            SimulationTrace::new(Mode::Congest, 5, vec![round], vec![(); 4]);
        let cut = t.cut_traffic(&g, &[true, true, false, false]).unwrap();
        assert_eq!(cut[0].out_of_part, 5);
        assert_eq!(cut[0].into_part, 5);
    }

    #[test]
    fn partition_must_be_proper() {
        let g = make_graph(2, 1, &[(0, 1, 1)]).unwrap();
        let t: SimulationTrace<()> = SimulationTrace::new(Mode::Bcc, 8, vec![], vec![(), ()]);
        assert!(t.cut_traffic(&g, &[true, true]).is_err());
        assert!(t.cut_traffic(&g, &[false, false]).is_err());
        assert!(t.cut_traffic(&g, &[true]).is_err());
    }

    #[test]
    fn json_and_csv_exports() {
        let g = make_graph(2, 1, &[(0, 1, 1)]).unwrap();
        let t: SimulationTrace<()> =
            SimulationTrace::new(Mode::Bcc, 8, vec![vec![record(0, 4)], vec![]], vec![(), ()]);
        let v = t.to_json();
        assert_eq!(v["mode"], "bcc");
        assert_eq!(v["B"], 8);
        assert_eq!(v["rounds"], 2);
        assert_eq!(v["per_round"][0][0]["kind"], "announce");
        assert_eq!(v["per_round"][0][0]["bits"], 4);
        let csv = t.summary_csv(&g, &[true, false]).unwrap();
        assert_eq!(csv, "round,total_bits,cut_bits\n1,4,4\n2,0,0\n");
        assert!(t.check_broadcast_only());
    }
}
