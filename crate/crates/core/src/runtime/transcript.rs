//! The public-opening ledger and per-peer traffic accounting.
//!
//! Every value a protocol run reveals to the public goes through
//! [`crate::runtime::PeerCtx::open_batch`] and lands here with a semantic
//! label. The full pipeline is allowed to reveal only prune bits, simplex
//! termination bits and the final output; the leakage audit fails a run on
//! anything else. Statistically masked exchanges inside subprotocols (the
//! comparison masks, resharing messages) are ordinary transport traffic,
//! not openings, and are counted only by the traffic meters.

use serde::{Deserialize, Serialize};

/// Semantic label of a public opening.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpenLabel {
    /// Branch-and-bound control decision (dequeue prune check or the
    /// branch/leaf decision of an explored node) — the leaked tree shape.
    PruneBit,
    /// One per simplex optimality check; `1` means the iteration loop stops.
    SimplexTerminationBit,
    /// The exchange-partner vectors revealed at the end of a run.
    FinalOutput,
    /// Test-harness reconstruction; forbidden outside test-hook sessions.
    TestOnly,
}

impl OpenLabel {
    pub fn code(self) -> u8 {
        match self {
            OpenLabel::PruneBit => 0,
            OpenLabel::SimplexTerminationBit => 1,
            OpenLabel::FinalOutput => 2,
            OpenLabel::TestOnly => 3,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        Some(match c {
            0 => OpenLabel::PruneBit,
            1 => OpenLabel::SimplexTerminationBit,
            2 => OpenLabel::FinalOutput,
            3 => OpenLabel::TestOnly,
            _ => return None,
        })
    }
}

/// One public opening: the label and the opened residue (little-endian
/// limbs, lossless for every supported field).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenEvent {
    pub label: OpenLabel,
    pub limbs: [u64; 4],
}

impl OpenEvent {
    /// The opened value as a small unsigned integer (bits, indices).
    pub fn as_u64(&self) -> Option<u64> {
        if self.limbs[1] == 0 && self.limbs[2] == 0 && self.limbs[3] == 0 {
            Some(self.limbs[0])
        } else {
            None
        }
    }
}

/// Per-peer traffic and simulated-clock counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeerStats {
    pub party: usize,
    /// Frame bytes sent (payload plus the 4-byte length prefix).
    pub bytes_sent: u64,
    pub messages_sent: u64,
    /// Synchronized communication rounds this peer took part in.
    pub rounds: u64,
    /// Simulated clock: per round, latency plus serialization time of the
    /// peer's own outgoing bytes under the bandwidth cap.
    pub sim_clock_ms: f64,
}

impl PeerStats {
    pub fn new(party: usize) -> Self {
        PeerStats {
            party,
            bytes_sent: 0,
            messages_sent: 0,
            rounds: 0,
            sim_clock_ms: 0.0,
        }
    }
}

/// Merged run record: the opening sequence (identical at every peer, which
/// the session verifies) plus every peer's counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub events: Vec<OpenEvent>,
    pub peer_stats: Vec<PeerStats>,
}

impl Transcript {
    /// Opened values carrying `label`, in order.
    pub fn values_with_label(&self, label: OpenLabel) -> Vec<u64> {
        self.events
            .iter()
            .filter(|e| e.label == label)
            .map(|e| e.as_u64().expect("labelled opening out of u64 range"))
            .collect()
    }

    /// Distinct labels present in this run.
    pub fn labels(&self) -> Vec<OpenLabel> {
        let mut seen = Vec::new();
        for e in &self.events {
            if !seen.contains(&e.label) {
                seen.push(e.label);
            }
        }
        seen
    }

    pub fn total_bytes_sent(&self) -> u64 {
        self.peer_stats.iter().map(|s| s.bytes_sent).sum()
    }

    pub fn max_peer_bytes(&self) -> u64 {
        self.peer_stats.iter().map(|s| s.bytes_sent).max().unwrap_or(0)
    }

    pub fn rounds(&self) -> u64 {
        self.peer_stats.iter().map(|s| s.rounds).max().unwrap_or(0)
    }

    pub fn sim_runtime_ms(&self) -> f64 {
        self.peer_stats
            .iter()
            .map(|s| s.sim_clock_ms)
            .fold(0.0, f64::max)
    }
}
