//! Round-based multi-peer runtime.
//!
//! Hosts `kappa` computing peers as independent logical processes that
//! exchange length-prefixed frames in synchronized rounds, over in-process
//! channels with a simulated clock (default) or loopback TCP sockets. The
//! runtime meters traffic per peer, injects latency into the simulated
//! clock, and keeps the public-opening ledger that the leakage audit
//! inspects.

mod ctx;
mod session;
mod transcript;
mod transport;

pub use ctx::{t_subsets, PeerCtx};
pub use session::{run_session, SessionOutcome};
pub use transcript::{OpenEvent, OpenLabel, PeerStats, Transcript};
pub use transport::{inproc_mesh, socket_mesh, Transport, FRAME_OVERHEAD};

use crate::shamir::ShareError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("consistency failure: {0}")]
    Consistency(String),
    #[error("connection failure: {0}")]
    Connection(String),
    #[error("test hooks are disabled for this session")]
    TestHooksDisabled,
    #[error(transparent)]
    Share(#[from] ShareError),
    #[error("internal runtime error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportKind {
    InProc,
    Socket,
}

impl std::str::FromStr for TransportKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inproc" | "in-proc" | "in_process" => Ok(TransportKind::InProc),
            "socket" | "tcp" => Ok(TransportKind::Socket),
            other => Err(format!("unknown transport '{other}' (inproc|socket)")),
        }
    }
}

/// Per-session peer configuration.
///
/// Config keys (file and `KEX_`-prefixed environment): `peers`, `threshold`,
/// `latency_ms`, `bandwidth_bps`, `transport`, `seed`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionConfig {
    /// Number of computing peers (kappa).
    pub kappa: usize,
    /// Corruption threshold t; requires `kappa >= 2t + 1`.
    pub threshold: usize,
    pub transport: TransportKind,
    /// One-hop message latency injected per round.
    pub latency_ms: f64,
    /// Link bandwidth for the serialization term of the simulated clock;
    /// `None` models infinitely fast links.
    pub bandwidth_bps: Option<u64>,
    /// Master seed; all peer and dealer randomness derives from it.
    pub seed: u64,
    /// Statistical security parameter for masked comparisons.
    pub stat_sec: u32,
    /// Allow `TestOnly` openings and reconstruction-based assertions.
    pub test_hooks: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            kappa: 3,
            threshold: 1,
            transport: TransportKind::InProc,
            latency_ms: 1.0,
            bandwidth_bps: Some(1_000_000_000),
            seed: 0,
            stat_sec: 40,
            test_hooks: false,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), RuntimeError> {
        if self.threshold < 1 || self.kappa < 2 * self.threshold + 1 {
            return Err(RuntimeError::Internal(format!(
                "kappa={} must be at least 2t+1 with t={} >= 1",
                self.kappa, self.threshold
            )));
        }
        if self.latency_ms < 0.0 {
            return Err(RuntimeError::Internal("negative latency".into()));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_latency(mut self, ms: f64) -> Self {
        self.latency_ms = ms;
        self
    }

    pub fn with_test_hooks(mut self) -> Self {
        self.test_hooks = true;
        self
    }
}
