//! Per-peer execution context.
//!
//! Protocol code is written once, from the perspective of a single peer,
//! and runs identically at every peer (control flow may depend only on
//! public values). The context owns the peer's transport endpoint, private
//! randomness, pseudo-random secret sharing state, traffic meters and the
//! opening ledger.

use super::transcript::{OpenEvent, OpenLabel, PeerStats};
use super::transport::{Transport, FRAME_OVERHEAD};
use super::{RuntimeError, SessionConfig};
use crate::field::PrimeField;
use crate::shamir::{PartyId, SecretShare, Sh, Shamir};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// Internal frame tag for masked exchanges (never a transcript label).
const MASKED_TAG: u8 = 0xFF;

/// One maximal unqualified set `A` (size `t`) together with this peer's
/// pseudo-random-sharing state for it. Peers outside `A` share a key; the
/// polynomial `f_A` has `f_A(0) = 1` and vanishes on `A`'s points.
struct PrssSubset<F> {
    excluded: Vec<PartyId>,
    key: Option<[u8; 32]>,
    f_at_me: F,
    stream: Option<ChaCha12Rng>,
}

pub struct PeerCtx<F: PrimeField> {
    party: PartyId,
    cfg: SessionConfig,
    shamir: Shamir<F>,
    transport: Box<dyn Transport>,
    rng: ChaCha12Rng,
    subsets: Vec<PrssSubset<F>>,
    setup_done: bool,
    session_id: [u8; 32],
    shuffle_invocations: u64,
    stats: PeerStats,
    events: Vec<OpenEvent>,
}

impl<F: PrimeField> PeerCtx<F> {
    pub fn new(
        party: PartyId,
        cfg: SessionConfig,
        transport: Box<dyn Transport>,
    ) -> Result<Self, RuntimeError> {
        let shamir = Shamir::new(cfg.kappa, cfg.threshold)?;
        let mut seed_input = [0u8; 32];
        let mut h = Sha256::new();
        h.update(b"kex-peer-rng");
        h.update(cfg.seed.to_le_bytes());
        h.update((party as u64).to_le_bytes());
        seed_input.copy_from_slice(&h.finalize());
        let rng = ChaCha12Rng::from_seed(seed_input);
        let subsets = t_subsets(cfg.kappa, cfg.threshold)
            .into_iter()
            .map(|excluded| {
                let f_at_me = if excluded.contains(&party) {
                    F::zero()
                } else {
                    eval_f_subset::<F>(&excluded, party)
                };
                PrssSubset {
                    excluded,
                    key: None,
                    f_at_me,
                    stream: None,
                }
            })
            .collect();
        Ok(PeerCtx {
            party,
            cfg,
            shamir,
            transport,
            rng,
            subsets,
            setup_done: false,
            session_id: [0u8; 32],
            shuffle_invocations: 0,
            stats: PeerStats::new(party),
            events: Vec::new(),
        })
    }

    pub fn party(&self) -> PartyId {
        self.party
    }

    pub fn kappa(&self) -> usize {
        self.cfg.kappa
    }

    pub fn threshold(&self) -> usize {
        self.cfg.threshold
    }

    pub fn config(&self) -> &SessionConfig {
        &self.cfg
    }

    pub fn shamir(&self) -> &Shamir<F> {
        &self.shamir
    }

    pub fn rng(&mut self) -> &mut ChaCha12Rng {
        &mut self.rng
    }

    pub fn stats(&self) -> &PeerStats {
        &self.stats
    }

    pub(crate) fn take_results(self) -> (PeerStats, Vec<OpenEvent>) {
        (self.stats, self.events)
    }

    fn others(&self) -> Vec<PartyId> {
        (0..self.cfg.kappa).filter(|&p| p != self.party).collect()
    }

    // -- rounds ------------------------------------------------------------

    /// One synchronized communication round: deliver `outgoing`, then block
    /// for one frame from each peer in `expect`. A round with nothing to
    /// send or receive costs nothing. The simulated clock advances by the
    /// configured latency plus the serialization time of this peer's own
    /// outgoing bytes under the bandwidth cap.
    pub fn exchange(
        &mut self,
        outgoing: Vec<(PartyId, Vec<u8>)>,
        expect: &[PartyId],
    ) -> Result<Vec<(PartyId, Vec<u8>)>, RuntimeError> {
        if outgoing.is_empty() && expect.is_empty() {
            return Ok(Vec::new());
        }
        self.stats.rounds += 1;
        let mut sent_bytes = 0u64;
        for (to, payload) in &outgoing {
            sent_bytes += FRAME_OVERHEAD + payload.len() as u64;
            self.stats.messages_sent += 1;
            self.transport.send(*to, payload)?;
        }
        self.stats.bytes_sent += sent_bytes;
        let mut dt = self.cfg.latency_ms;
        if let Some(bw) = self.cfg.bandwidth_bps {
            dt += (sent_bytes as f64 * 8.0) / bw as f64 * 1000.0;
        }
        self.stats.sim_clock_ms += dt;
        let mut inbox = Vec::with_capacity(expect.len());
        for &from in expect {
            inbox.push((from, self.transport.recv(from)?));
        }
        Ok(inbox)
    }

    /// Send the same payload to every other peer and collect one frame from
    /// each, in peer order.
    pub fn broadcast(&mut self, payload: &[u8]) -> Result<Vec<(PartyId, Vec<u8>)>, RuntimeError> {
        let others = self.others();
        let outgoing = others.iter().map(|&p| (p, payload.to_vec())).collect();
        self.exchange(outgoing, &others)
    }

    // -- element framing ----------------------------------------------------

    pub fn encode_elems(tag: u8, xs: &[F]) -> Vec<u8> {
        let mut out = Vec::with_capacity(1 + xs.len() * F::byte_len());
        out.push(tag);
        for x in xs {
            x.write_bytes(&mut out);
        }
        out
    }

    pub fn decode_elems(tag: u8, payload: &[u8]) -> Result<Vec<F>, RuntimeError> {
        let w = F::byte_len();
        if payload.is_empty() || (payload.len() - 1) % w != 0 {
            return Err(RuntimeError::Consistency("malformed frame".into()));
        }
        if payload[0] != tag {
            return Err(RuntimeError::Consistency(format!(
                "frame tag mismatch: expected {tag}, got {}",
                payload[0]
            )));
        }
        payload[1..]
            .chunks(w)
            .map(|c| {
                F::from_bytes(c).ok_or_else(|| {
                    RuntimeError::Consistency("non-canonical field element".into())
                })
            })
            .collect()
    }

    // -- openings ------------------------------------------------------------

    fn open_with_tag(&mut self, xs: &[Sh<F>], tag: u8) -> Result<Vec<F>, RuntimeError> {
        if xs.is_empty() {
            return Ok(Vec::new());
        }
        let shares: Vec<F> = xs.iter().map(|s| s.0).collect();
        let payload = Self::encode_elems(tag, &shares);
        let inbox = self.broadcast(&payload)?;
        let mut per_party: Vec<(PartyId, Vec<F>)> = vec![(self.party, shares)];
        for (from, frame) in inbox {
            let elems = Self::decode_elems(tag, &frame).map_err(|e| match e {
                RuntimeError::Consistency(msg) => {
                    RuntimeError::Consistency(format!("peer {from}: {msg}"))
                }
                other => other,
            })?;
            if elems.len() != xs.len() {
                return Err(RuntimeError::Consistency(format!(
                    "peer {from} opened {} values, expected {}",
                    elems.len(),
                    xs.len()
                )));
            }
            per_party.push((from, elems));
        }
        per_party.sort_by_key(|(p, _)| *p);
        let mut out = Vec::with_capacity(xs.len());
        let mut points = Vec::with_capacity(self.cfg.kappa);
        for k in 0..xs.len() {
            points.clear();
            for (p, elems) in &per_party {
                points.push(SecretShare {
                    party: *p,
                    point: elems[k],
                });
            }
            let v = self.shamir.reconstruct_checked(&points).map_err(|e| {
                RuntimeError::Consistency(format!("divergent opening: {e}"))
            })?;
            out.push(v);
        }
        Ok(out)
    }

    /// Reveal shared values to every peer under a semantic label; the
    /// openings are appended to the transcript. All peers must call this at
    /// the same point with the same label or the run aborts.
    pub fn open_batch(&mut self, xs: &[Sh<F>], label: OpenLabel) -> Result<Vec<F>, RuntimeError> {
        if label == OpenLabel::TestOnly && !self.cfg.test_hooks {
            return Err(RuntimeError::TestHooksDisabled);
        }
        let values = self.open_with_tag(xs, label.code())?;
        for v in &values {
            self.events.push(OpenEvent {
                label,
                limbs: v.to_limbs_le(),
            });
        }
        Ok(values)
    }

    /// Open a single shared value and return it as a small unsigned integer.
    pub fn open_u64(&mut self, x: Sh<F>, label: OpenLabel) -> Result<u64, RuntimeError> {
        let v = self.open_batch(&[x], label)?[0];
        let l = v.to_limbs_le();
        if l[1] != 0 || l[2] != 0 || l[3] != 0 {
            return Err(RuntimeError::Consistency(
                "opened value out of expected small range".into(),
            ));
        }
        Ok(l[0])
    }

    /// Reveal *statistically masked* throwaway values (comparison masks,
    /// inversion blinds). These are ordinary messages: counted by the
    /// traffic meters, absent from the opening ledger.
    pub fn open_masked_batch(&mut self, xs: &[Sh<F>]) -> Result<Vec<F>, RuntimeError> {
        self.open_with_tag(xs, MASKED_TAG)
    }

    /// Test-harness reconstruction (label `TestOnly`); rejected unless the
    /// session enables test hooks.
    pub fn test_open_batch(&mut self, xs: &[Sh<F>]) -> Result<Vec<F>, RuntimeError> {
        self.open_batch(xs, OpenLabel::TestOnly)
    }

    // -- session setup and pseudo-random sharing -----------------------------

    /// Committed seed exchange plus distribution of the per-subset keys that
    /// drive non-interactive shared randomness and the shuffle stages. Runs
    /// lazily the first time such randomness is needed.
    pub fn ensure_setup(&mut self) -> Result<(), RuntimeError> {
        if self.setup_done {
            return Ok(());
        }
        let mut contrib = [0u8; 32];
        self.rng.fill_bytes(&mut contrib);
        let mut h = Sha256::new();
        h.update(b"kex-commit");
        h.update((self.party as u64).to_le_bytes());
        h.update(contrib);
        let my_commit: [u8; 32] = h.finalize().into();

        let commits = self.broadcast(&my_commit)?;
        let reveals = self.broadcast(&contrib)?;
        let mut all_contribs: Vec<(PartyId, [u8; 32])> = vec![(self.party, contrib)];
        for ((pc, commit), (pr, reveal)) in commits.iter().zip(&reveals) {
            if pc != pr || reveal.len() != 32 || commit.len() != 32 {
                return Err(RuntimeError::Consistency("malformed setup frame".into()));
            }
            let mut h = Sha256::new();
            h.update(b"kex-commit");
            h.update((*pc as u64).to_le_bytes());
            h.update(reveal);
            if h.finalize().as_slice() != commit.as_slice() {
                return Err(RuntimeError::Consistency(format!(
                    "peer {pc} seed commitment mismatch"
                )));
            }
            let mut c = [0u8; 32];
            c.copy_from_slice(reveal);
            all_contribs.push((*pr, c));
        }
        all_contribs.sort_by_key(|(p, _)| *p);
        let mut h = Sha256::new();
        h.update(b"kex-session");
        for (_, c) in &all_contribs {
            h.update(c);
        }
        self.session_id = h.finalize().into();

        // Distribute one key per excluded subset A: the lowest-id peer
        // outside A draws it and sends it to the other peers outside A.
        let mut outgoing: Vec<(PartyId, Vec<u8>)> = Vec::new();
        let mut my_keys: Vec<(usize, [u8; 32])> = Vec::new();
        let mut expect: Vec<PartyId> = Vec::new();
        for (idx, sub) in self.subsets.iter().enumerate() {
            let holders: Vec<PartyId> = (0..self.cfg.kappa)
                .filter(|p| !sub.excluded.contains(p))
                .collect();
            let leader = holders[0];
            if leader == self.party {
                let mut key = [0u8; 32];
                self.rng.fill_bytes(&mut key);
                my_keys.push((idx, key));
                for &q in &holders[1..] {
                    match outgoing.iter_mut().find(|(p, _)| *p == q) {
                        Some((_, buf)) => buf.extend_from_slice(&key),
                        None => outgoing.push((q, key.to_vec())),
                    }
                }
            } else if holders.contains(&self.party) && !expect.contains(&leader) {
                expect.push(leader);
            }
        }
        expect.sort_unstable();
        outgoing.sort_by_key(|(p, _)| *p);
        let inbox = self.exchange(outgoing, &expect)?;
        // Parse received keys in subset order per leader.
        let mut cursor: Vec<(PartyId, usize)> = inbox.iter().map(|(p, _)| (*p, 0usize)).collect();
        for (idx, sub) in self.subsets.iter().enumerate() {
            let holders: Vec<PartyId> = (0..self.cfg.kappa)
                .filter(|p| !sub.excluded.contains(p))
                .collect();
            let leader = holders[0];
            if leader != self.party && holders.contains(&self.party) {
                let (_, frame) = inbox
                    .iter()
                    .find(|(p, _)| *p == leader)
                    .ok_or_else(|| RuntimeError::Consistency("missing key frame".into()))?;
                let pos = &mut cursor.iter_mut().find(|(p, _)| *p == leader).unwrap().1;
                if frame.len() < *pos + 32 {
                    return Err(RuntimeError::Consistency("short key frame".into()));
                }
                let mut key = [0u8; 32];
                key.copy_from_slice(&frame[*pos..*pos + 32]);
                *pos += 32;
                my_keys.push((idx, key));
            }
        }
        for (idx, key) in my_keys {
            let mut h = Sha256::new();
            h.update(b"kex-prss-stream");
            h.update(self.session_id);
            h.update(key);
            let seed: [u8; 32] = h.finalize().into();
            self.subsets[idx].key = Some(key);
            self.subsets[idx].stream = Some(ChaCha12Rng::from_seed(seed));
        }
        self.setup_done = true;
        Ok(())
    }

    /// Non-interactive degree-`t` sharings of jointly uniform field elements.
    pub fn prss_field(&mut self, n: usize) -> Result<Vec<Sh<F>>, RuntimeError> {
        self.ensure_setup()?;
        let mut out = vec![Sh(F::zero()); n];
        for sub in &mut self.subsets {
            if let Some(stream) = sub.stream.as_mut() {
                for slot in out.iter_mut() {
                    *slot = Sh(slot.0 + F::sample(stream) * sub.f_at_me);
                }
            }
        }
        Ok(out)
    }

    /// Non-interactive sharings of bounded random values: each is a sum of
    /// one uniform draw from `[0, 2^bits)` per subset key, so the secret
    /// lies in `[0, n_subsets * 2^bits)`.
    pub fn prss_bounded(&mut self, n: usize, bits: u32) -> Result<Vec<Sh<F>>, RuntimeError> {
        assert!(bits <= 63, "bounded PRSS draws are limited to 63 bits");
        self.ensure_setup()?;
        let mask = (1u64 << bits) - 1;
        let mut out = vec![Sh(F::zero()); n];
        for sub in &mut self.subsets {
            if let Some(stream) = sub.stream.as_mut() {
                for slot in out.iter_mut() {
                    let draw = stream.next_u64() & mask;
                    *slot = Sh(slot.0 + F::from_u64(draw) * sub.f_at_me);
                }
            }
        }
        Ok(out)
    }

    /// Number of subset keys contributing to each bounded draw.
    pub fn prss_subset_count(&self) -> usize {
        self.subsets.len()
    }

    /// Deal a fresh degree-`t` sharing of each secret: returns, per
    /// destination peer, the vector of its shares (own entry included).
    /// Purely local; the caller ships the frames.
    pub fn deal_shares(&mut self, secrets: &[F]) -> Vec<Vec<F>> {
        let kappa = self.cfg.kappa;
        let mut per_dest: Vec<Vec<F>> = (0..kappa)
            .map(|_| Vec::with_capacity(secrets.len()))
            .collect();
        for &s in secrets {
            let shares = self.shamir.share(s, &mut self.rng);
            for (dest, sh) in shares.into_iter().enumerate() {
                per_dest[dest].push(sh);
            }
        }
        per_dest
    }

    // -- shuffle support -----------------------------------------------------

    /// Subset groups in fixed order: `(excluded set A, peers holding the key)`.
    pub fn shuffle_groups(&self) -> Vec<(Vec<PartyId>, Vec<PartyId>)> {
        self.subsets
            .iter()
            .map(|s| {
                let holders = (0..self.cfg.kappa)
                    .filter(|p| !s.excluded.contains(p))
                    .collect();
                (s.excluded.clone(), holders)
            })
            .collect()
    }

    /// Fresh invocation id for a shuffle (identical at every peer).
    pub fn next_shuffle_invocation(&mut self) -> u64 {
        let inv = self.shuffle_invocations;
        self.shuffle_invocations += 1;
        inv
    }

    /// Deterministic group RNG for one shuffle stage; `None` when this peer
    /// is excluded from the group.
    pub fn group_rng(&mut self, subset_idx: usize, invocation: u64, domain: &[u8]) -> Result<Option<ChaCha12Rng>, RuntimeError> {
        self.ensure_setup()?;
        Ok(self.subsets[subset_idx].key.map(|key| {
            let mut h = Sha256::new();
            h.update(b"kex-group");
            h.update(self.session_id);
            h.update(key);
            h.update(domain);
            h.update(invocation.to_le_bytes());
            ChaCha12Rng::from_seed(h.finalize().into())
        }))
    }
}

/// All size-`t` subsets of `0..kappa` in lexicographic order.
pub fn t_subsets(kappa: usize, t: usize) -> Vec<Vec<PartyId>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(t);
    fn rec(start: usize, kappa: usize, t: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == t {
            out.push(cur.clone());
            return;
        }
        for v in start..kappa {
            cur.push(v);
            rec(v + 1, kappa, t, cur, out);
            cur.pop();
        }
    }
    rec(0, kappa, t, &mut cur, &mut out);
    out
}

/// `f_A(x)` at this peer's evaluation point, where `f_A(0) = 1` and `f_A`
/// vanishes on the points of `A`.
fn eval_f_subset<F: PrimeField>(excluded: &[PartyId], me: PartyId) -> F {
    let x = F::from_u64(me as u64 + 1);
    let mut acc = F::one();
    for &a in excluded {
        let pa = F::from_u64(a as u64 + 1);
        acc = acc * (pa - x) * pa.inv().expect("nonzero point");
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumeration() {
        assert_eq!(t_subsets(3, 1), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(t_subsets(4, 2).len(), 6);
        assert_eq!(t_subsets(4, 2)[0], vec![0, 1]);
    }

    #[test]
    fn f_subset_interpolates_one_at_zero() {
        use crate::field::F127;
        // f_{A}(0) = 1 reconstructed from the holders' evaluations
        let excluded = vec![1usize];
        let holders = [0usize, 2];
        let w = crate::shamir::lagrange_weights_at_zero::<F127>(&holders);
        let mut acc = F127::zero();
        for (h, wi) in holders.iter().zip(w) {
            acc = acc + eval_f_subset::<F127>(&excluded, *h) * wi;
        }
        assert_eq!(acc, F127::one());
        assert!(eval_f_subset::<F127>(&excluded, 1).is_zero());
    }
}
