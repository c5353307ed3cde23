//! Session driver: hosts the computing peers as independent threads running
//! the same program, merges their transcripts and enforces agreement on
//! every opened value.

use super::ctx::PeerCtx;
use super::transcript::Transcript;
use super::transport::{inproc_mesh, socket_mesh, Transport};
use super::{RuntimeError, SessionConfig, TransportKind};
use crate::field::PrimeField;

/// Result of a protocol run: every peer's program output plus the merged
/// transcript.
#[derive(Debug)]
pub struct SessionOutcome<R> {
    pub outputs: Vec<R>,
    pub transcript: Transcript,
}

/// Run `program` at every peer over the configured transport. `inputs`
/// carries one per-peer payload (typically that peer's input shares).
///
/// A peer failing makes the remaining peers fail with connection errors as
/// their channels close; the first substantive error wins.
pub fn run_session<F, In, R, P>(
    cfg: &SessionConfig,
    inputs: Vec<In>,
    program: P,
) -> crate::Result<SessionOutcome<R>>
where
    F: PrimeField,
    In: Send,
    R: Send,
    P: Fn(&mut PeerCtx<F>, In) -> crate::Result<R> + Sync,
{
    cfg.validate()?;
    if inputs.len() != cfg.kappa {
        return Err(RuntimeError::Consistency(format!(
            "expected {} peer inputs, got {}",
            cfg.kappa,
            inputs.len()
        ))
        .into());
    }
    let transports: Vec<Box<dyn Transport>> = match cfg.transport {
        TransportKind::InProc => inproc_mesh(cfg.kappa)
            .into_iter()
            .map(|t| Box::new(t) as Box<dyn Transport>)
            .collect(),
        TransportKind::Socket => socket_mesh(cfg.kappa)?
            .into_iter()
            .map(|t| Box::new(t) as Box<dyn Transport>)
            .collect(),
    };

    let program = &program;
    let mut per_peer = Vec::with_capacity(cfg.kappa);
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(cfg.kappa);
        for (party, (transport, input)) in transports.into_iter().zip(inputs).enumerate() {
            let cfg = cfg.clone();
            handles.push(scope.spawn(move || -> crate::Result<_> {
                let mut ctx = PeerCtx::<F>::new(party, cfg, transport)?;
                let out = program(&mut ctx, input)?;
                let (stats, events) = ctx.take_results();
                Ok((out, stats, events))
            }));
        }
        for h in handles {
            let joined = h.join().map_err(|_| {
                crate::Error::Runtime(RuntimeError::Internal("peer thread panicked".into()))
            });
            per_peer.push(joined.and_then(|r| r));
        }
    });

    // Prefer a substantive error over the connection fallout it causes.
    let mut first_conn: Option<crate::Error> = None;
    let mut results = Vec::with_capacity(cfg.kappa);
    for r in per_peer {
        match r {
            Ok(v) => results.push(v),
            Err(e) => match e {
                crate::Error::Runtime(RuntimeError::Connection(_)) => {
                    if first_conn.is_none() {
                        first_conn = Some(e);
                    }
                }
                other => return Err(other),
            },
        }
    }
    if let Some(e) = first_conn {
        return Err(e);
    }

    // Agreement: every peer observed the same opening sequence.
    let mut outputs = Vec::with_capacity(cfg.kappa);
    let mut peer_stats = Vec::with_capacity(cfg.kappa);
    let mut events = None;
    for (out, stats, ev) in results {
        match &events {
            None => events = Some(ev),
            Some(reference) => {
                if reference != &ev {
                    return Err(RuntimeError::Consistency(
                        "peers disagree on the opened-value sequence".into(),
                    )
                    .into());
                }
            }
        }
        peer_stats.push(stats);
        outputs.push(out);
    }
    peer_stats.sort_by_key(|s| s.party);
    Ok(SessionOutcome {
        outputs,
        transcript: Transcript {
            events: events.unwrap_or_default(),
            peer_stats,
        },
    })
}
