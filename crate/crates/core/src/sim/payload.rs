//! Structured message payloads and their fixed-width bit codec.
//!
//! Field widths come from the network parameters: node IDs take
//! `⌈log₂ n⌉` bits, edge-weight numerators `⌈log₂(p²+1)⌉`, path-length
//! numerators `⌈log₂(n·p²+1)⌉`. Counters (hop distances, rounded weights)
//! default to the path width and can be widened for long schedules.

use bitvec::prelude::*;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::graph::NodeId;

const TAG_BITS: u32 = 3;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    /// A bare node ID.
    Announce { node: NodeId },
    /// An edge `(u, v)` with weight numerator `weight`.
    Edge { u: NodeId, v: NodeId, weight: u64 },
    /// Membership of `node` in the sender's neighborhood, with its distance numerator.
    Neighbor { node: NodeId, dist: u64 },
    /// A single path-length numerator (e.g. a local maximum).
    Bound { value: u64 },
    /// Source-detection entry: `source` at `hops` (rounded) distance.
    Source { hops: u64, source: NodeId },
    /// Rounded distance estimate to `hub` found at rounding level `level`.
    HubDistance {
        hub: NodeId,
        level: u32,
        rounded: u64,
    },
    /// No qualifying estimate to `hub`.
    HubUnreachable { hub: NodeId },
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Announce { .. } => "announce",
            Payload::Edge { .. } => "edge",
            Payload::Neighbor { .. } => "neighbor",
            Payload::Bound { .. } => "bound",
            Payload::Source { .. } => "source",
            Payload::HubDistance { .. } => "hub_distance",
            Payload::HubUnreachable { .. } => "hub_unreachable",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            Payload::Announce { .. } => 0,
            Payload::Edge { .. } => 1,
            Payload::Neighbor { .. } => 2,
            Payload::Bound { .. } => 3,
            Payload::Source { .. } => 4,
            Payload::HubDistance { .. } => 5,
            Payload::HubUnreachable { .. } => 6,
        }
    }
}

/// Bits needed for the values `0..=max`.
pub fn bits_for(max: u64) -> u32 {
    (64 - max.leading_zeros()).max(1)
}

/// Default message size `B = 3⌈log₂ n⌉ + ⌈log₂(p²+1)⌉ + 4`.
pub fn default_bandwidth(n: usize, p: u64) -> u32 {
    3 * bits_for(n.saturating_sub(1) as u64) + bits_for(p.saturating_mul(p)) + 4
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codec {
    n: usize,
    id_bits: u32,
    weight_bits: u32,
    dist_bits: u32,
    count_bits: u32,
    level_bits: u32,
}

#[derive(Copy, Clone)]
enum Field {
    Id,
    Weight,
    Dist,
    Count,
    Level,
}

impl Codec {
    pub fn new(n: usize, p: u64) -> Self {
        let p2 = p.saturating_mul(p);
        let dist_bits = bits_for((n as u64).saturating_mul(p2));
        Codec {
            n,
            id_bits: bits_for(n.saturating_sub(1) as u64),
            weight_bits: bits_for(p2),
            dist_bits,
            count_bits: dist_bits,
            level_bits: 6,
        }
    }

    /// Widens the counter field so that values up to `max` fit.
    pub fn with_count_limit(mut self, max: u64) -> Self {
        self.count_bits = self.count_bits.max(bits_for(max));
        self
    }

    pub fn count_bits(&self) -> u32 {
        self.count_bits
    }

    fn width(&self, field: Field) -> u32 {
        match field {
            Field::Id => self.id_bits,
            Field::Weight => self.weight_bits,
            Field::Dist => self.dist_bits,
            Field::Count => self.count_bits,
            Field::Level => self.level_bits,
        }
    }

    fn layout(tag: u64) -> Option<&'static [Field]> {
        use Field::*;
        Some(match tag {
            0 => &[Id],
            1 => &[Id, Id, Weight],
            2 => &[Id, Dist],
            3 => &[Dist],
            4 => &[Count, Id],
            5 => &[Id, Level, Count],
            6 => &[Id],
            _ => return None,
        })
    }

    fn fields(payload: &Payload) -> Vec<u64> {
        match *payload {
            Payload::Announce { node } => vec![node as u64],
            Payload::Edge { u, v, weight } => vec![u as u64, v as u64, weight],
            Payload::Neighbor { node, dist } => vec![node as u64, dist],
            Payload::Bound { value } => vec![value],
            Payload::Source { hops, source } => vec![hops, source as u64],
            Payload::HubDistance {
                hub,
                level,
                rounded,
            } => {
                vec![hub as u64, level as u64, rounded]
            }
            Payload::HubUnreachable { hub } => vec![hub as u64],
        }
    }

    /// Encoded size in bits. Values wider than their field are charged at
    /// their own width, so an oversized payload always reports its true size.
    pub fn size(&self, payload: &Payload) -> u32 {
        let layout = Self::layout(payload.tag()).expect("every payload has a layout");
        TAG_BITS
            + layout
                .iter()
                .zip(Self::fields(payload))
                .map(|(&f, value)| self.width(f).max(bits_for(value)))
                .sum::<u32>()
    }

    /// Largest encoded size over all payload kinds.
    pub fn max_payload_bits(&self) -> u32 {
        (0..7)
            .filter_map(Self::layout)
            .map(|l| TAG_BITS + l.iter().map(|&f| self.width(f)).sum::<u32>())
            .max()
            .unwrap_or(TAG_BITS)
    }

    fn fits(&self, payload: &Payload) -> bool {
        let layout = Self::layout(payload.tag()).expect("every payload has a layout");
        layout
            .iter()
            .zip(Self::fields(payload))
            .all(|(&f, value)| bits_for(value) <= self.width(f))
    }

    /// Encodes `payload`, failing when it does not fit in `limit` bits.
    pub fn encode(&self, payload: &Payload, limit: u32) -> Result<BitVec<u8, Msb0>, SimError> {
        let size = self.size(payload);
        if size > limit || !self.fits(payload) {
            return Err(SimError::MessageTooLarge {
                node: None,
                round: None,
                bits: size,
                limit,
            });
        }
        let mut bits = BitVec::<u8, Msb0>::with_capacity(size as usize);
        push_bits(&mut bits, payload.tag(), TAG_BITS);
        let layout = Self::layout(payload.tag()).expect("every payload has a layout");
        for (&f, value) in layout.iter().zip(Self::fields(payload)) {
            push_bits(&mut bits, value, self.width(f));
        }
        Ok(bits)
    }

    pub fn decode(&self, bits: &BitSlice<u8, Msb0>) -> Result<Payload, SimError> {
        let malformed = |msg: &str| SimError::MalformedBits(msg.to_string());
        if bits.len() < TAG_BITS as usize {
            return Err(malformed("shorter than the kind tag"));
        }
        let tag = read_bits(&bits[..TAG_BITS as usize]);
        let layout = Self::layout(tag).ok_or_else(|| malformed("unknown kind tag"))?;
        let expected = TAG_BITS + layout.iter().map(|&f| self.width(f)).sum::<u32>();
        if bits.len() != expected as usize {
            return Err(malformed("length does not match kind"));
        }
        let mut offset = TAG_BITS as usize;
        let mut values = Vec::with_capacity(layout.len());
        for &f in layout {
            let w = self.width(f) as usize;
            let value = read_bits(&bits[offset..offset + w]);
            if matches!(f, Field::Id) && value as usize >= self.n {
                return Err(malformed("node id out of range"));
            }
            values.push(value);
            offset += w;
        }
        let id = |i: usize| values[i] as NodeId;
        Ok(match tag {
            0 => Payload::Announce { node: id(0) },
            1 => Payload::Edge {
                u: id(0),
                v: id(1),
                weight: values[2],
            },
            2 => Payload::Neighbor {
                node: id(0),
                dist: values[1],
            },
            3 => Payload::Bound { value: values[0] },
            4 => Payload::Source {
                hops: values[0],
                source: id(1),
            },
            5 => Payload::HubDistance {
                hub: id(0),
                level: values[1] as u32,
                rounded: values[2],
            },
            _ => Payload::HubUnreachable { hub: id(0) },
        })
    }
}

fn push_bits(out: &mut BitVec<u8, Msb0>, value: u64, width: u32) {
    for i in (0..width).rev() {
        out.push((value >> i) & 1 == 1);
    }
}

fn read_bits(bits: &BitSlice<u8, Msb0>) -> u64 {
    bits.iter().fold(0u64, |acc, b| (acc << 1) | u64::from(*b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn edge_payload_round_trips() {
        let codec = Codec::new(16, 4);
        let b = default_bandwidth(16, 4);
        assert_eq!(b, 3 * 4 + 5 + 4);
        let msg = Payload::Edge {
            u: 3,
            v: 7,
            weight: 12,
        };
        let bits = codec.encode(&msg, b).unwrap();
        assert!(bits.len() as u32 <= b);
        assert_eq!(bits.len() as u32, codec.size(&msg));
        assert_eq!(codec.decode(&bits).unwrap(), msg);
    }

    #[test]
    fn source_payload_round_trips() {
        let codec = Codec::new(16, 4);
        let msg = Payload::Source { hops: 5, source: 2 };
        let bits = codec.encode(&msg, default_bandwidth(16, 4)).unwrap();
        assert_eq!(codec.decode(&bits).unwrap(), msg);
    }

    #[test]
    fn oversized_payloads_are_rejected() {
        let codec = Codec::new(16, 4);
        let msg = Payload::Edge {
            u: 3,
            v: 7,
            weight: 12,
        };
        let err = codec.encode(&msg, 8).unwrap_err();
        assert!(matches!(
            err,
            SimError::MessageTooLarge {
                bits: 16,
                limit: 8,
                ..
            }
        ));
        // A value too wide for its field is also too large.
        let wide = Payload::Edge {
            u: 3,
            v: 7,
            weight: 1 << 20,
        };
        assert!(codec.encode(&wide, 1000).is_err());
    }

    #[test]
    fn malformed_bits() {
        let codec = Codec::new(16, 4);
        let mut bits = codec.encode(&Payload::Announce { node: 9 }, 100).unwrap();
        bits.push(false);
        assert!(matches!(
            codec.decode(&bits),
            Err(SimError::MalformedBits(_))
        ));
        let junk: BitVec<u8, Msb0> = bitvec![u8, Msb0; 1, 1, 1, 0, 0, 0, 0];
        assert!(matches!(
            codec.decode(&junk),
            Err(SimError::MalformedBits(_))
        ));
        // node id 12 with n = 10 does not exist
        let codec10 = Codec::new(10, 1);
        let mut raw = BitVec::<u8, Msb0>::new();
        push_bits(&mut raw, 0, 3);
        push_bits(&mut raw, 12, 4);
        assert!(codec10.decode(&raw).is_err());
    }

    #[test]
    fn default_bandwidth_fits_triples() {
        for n in [2usize, 3, 16, 64, 256, 1000] {
            for p in [1u64, 2, 16, 100] {
                let codec = Codec::new(n, p);
                let b = default_bandwidth(n, p);
                let triple = Payload::Edge {
                    u: n - 1,
                    v: n - 1,
                    weight: p * p,
                };
                assert!(codec.size(&triple) <= b);
                let nb = Payload::Neighbor {
                    node: n - 1,
                    dist: n as u64 * p * p,
                };
                assert!(codec.size(&nb) <= b);
            }
        }
    }

    fn payload_strategy(n: usize, p: u64) -> impl Strategy<Value = Payload> {
        let id = 0..n;
        let w = 0..=p * p;
        let d = 0..=(n as u64 * p * p);
        prop_oneof![
            id.clone().prop_map(|node| Payload::Announce { node }),
            (id.clone(), id.clone(), w).prop_map(|(u, v, weight)| Payload::Edge { u, v, weight }),
            (id.clone(), d.clone()).prop_map(|(node, dist)| Payload::Neighbor { node, dist }),
            d.clone().prop_map(|value| Payload::Bound { value }),
            (d.clone(), id.clone()).prop_map(|(hops, source)| Payload::Source { hops, source }),
            (id.clone(), 0u32..64, d).prop_map(|(hub, level, rounded)| Payload::HubDistance {
                hub,
                level,
                rounded
            }),
            id.prop_map(|hub| Payload::HubUnreachable { hub }),
        ]
    }

    proptest! {
        #[test]
        fn codec_round_trips(
            (n, p, msg) in (2usize..300, 1u64..40)
                .prop_flat_map(|(n, p)| (Just(n), Just(p), payload_strategy(n, p)))
        ) {
            let codec = Codec::new(n, p);
            let bits = codec.encode(&msg, u32::MAX).unwrap();
            prop_assert_eq!(bits.len() as u32, codec.size(&msg));
            prop_assert_eq!(codec.decode(&bits).unwrap(), msg);
        }
    }
}
