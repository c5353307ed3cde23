//! Oblivious shuffle of a shared square matrix.
//!
//! Rows and columns are conjugated by a hidden permutation so that nothing
//! in the later tableaus can be linked to a pair index. The permutation is
//! composed stage by stage: for every size-`t` subset `A` of peers, the
//! peers outside `A` (who share a stage key from session setup) convert the
//! matrix to an additive sharing among themselves, apply a common random
//! permutation to both dimensions, re-randomize with masks summing to
//! zero, and reshare back to the full Shamir sharing. A coalition of at
//! most `t` peers is excluded from at least one stage and so never learns
//! the composition.
//!
//! `reverse` replays the stages backwards with inverted permutations and
//! fresh masks, restoring the original indexing.

use crate::field::PrimeField;
use crate::runtime::{PeerCtx, RuntimeError};
use crate::shamir::{PartyId, Sh};
use crate::Result;
use rand::{Rng, RngCore};

/// Handle tying a reverse shuffle to the forward pass it undoes.
#[derive(Debug, Clone, Copy)]
pub struct ShuffleTicket {
    invocation: u64,
}

const TAG_SHUFFLE: u8 = 0xFD;

/// Apply the hidden composition to rows and columns.
pub fn shuffle_matrix<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    m: &[Vec<Sh<F>>],
) -> Result<(Vec<Vec<Sh<F>>>, ShuffleTicket)> {
    ctx.ensure_setup().map_err(crate::Error::Runtime)?;
    let invocation = ctx.next_shuffle_invocation();
    let stages = ctx.shuffle_groups().len();
    let mut cur = m.to_vec();
    for idx in 0..stages {
        cur = shuffle_stage(ctx, &cur, idx, invocation, false)?;
    }
    Ok((cur, ShuffleTicket { invocation }))
}

/// Undo a forward shuffle (stages reversed, permutations inverted).
pub fn reverse_shuffle_matrix<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    m: &[Vec<Sh<F>>],
    ticket: ShuffleTicket,
) -> Result<Vec<Vec<Sh<F>>>> {
    let stages = ctx.shuffle_groups().len();
    let mut cur = m.to_vec();
    for idx in (0..stages).rev() {
        cur = shuffle_stage(ctx, &cur, idx, ticket.invocation, true)?;
    }
    Ok(cur)
}

fn inverse_perm(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0usize; p.len()];
    for (i, &v) in p.iter().enumerate() {
        inv[v] = i;
    }
    inv
}

/// `out(i, j) = m(perm(i), perm(j))`.
fn conjugate<T: Copy>(m: &[Vec<T>], perm: &[usize]) -> Vec<Vec<T>> {
    let n = m.len();
    (0..n)
        .map(|i| (0..n).map(|j| m[perm[i]][perm[j]]).collect())
        .collect()
}

fn shuffle_stage<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    m: &[Vec<Sh<F>>],
    subset_idx: usize,
    invocation: u64,
    inverse: bool,
) -> Result<Vec<Vec<Sh<F>>>> {
    let n = m.len();
    let total = n * n;
    let me = ctx.party();
    let kappa = ctx.kappa();
    let (_, holders) = ctx.shuffle_groups()[subset_idx].clone();
    let in_group = holders.contains(&me);
    let others: Vec<PartyId> = (0..kappa).filter(|&p| p != me).collect();

    // Step 1: additive conversion among the holders. Every peer splits its
    // zero-interpolation contribution into one random piece per holder.
    let lag = ctx.shamir().lagrange_all()[me];
    let contrib: Vec<F> = m.iter().flatten().map(|sh| sh.0 * lag).collect();
    let mut pieces: Vec<Vec<F>> = Vec::with_capacity(holders.len());
    {
        let mut last: Vec<F> = contrib;
        for _ in 0..holders.len() - 1 {
            let piece: Vec<F> = (0..total).map(|_| F::sample(ctx.rng())).collect();
            for (l, p) in last.iter_mut().zip(&piece) {
                *l = *l - *p;
            }
            pieces.push(piece);
        }
        pieces.push(last);
    }
    let mut outgoing = Vec::new();
    let mut own_piece: Option<Vec<F>> = None;
    for (h, piece) in holders.iter().zip(pieces) {
        if *h == me {
            own_piece = Some(piece);
        } else {
            outgoing.push((*h, PeerCtx::<F>::encode_elems(TAG_SHUFFLE, &piece)));
        }
    }
    let expect: Vec<PartyId> = if in_group { others.clone() } else { Vec::new() };
    let inbox = ctx.exchange(outgoing, &expect).map_err(crate::Error::Runtime)?;

    // Step 2: holders permute and re-randomize their additive vectors.
    let beta: Option<Vec<F>> = if in_group {
        let mut acc = own_piece.expect("holder keeps a piece");
        for (_, frame) in inbox {
            let elems =
                PeerCtx::<F>::decode_elems(TAG_SHUFFLE, &frame).map_err(crate::Error::Runtime)?;
            if elems.len() != total {
                return Err(
                    RuntimeError::Consistency("shuffle piece length mismatch".into()).into(),
                );
            }
            for (a, e) in acc.iter_mut().zip(elems) {
                *a = *a + e;
            }
        }
        // the stage permutation is shared by the forward and reverse pass
        let mut perm_rng = ctx
            .group_rng(subset_idx, invocation, b"shuffle-perm")
            .map_err(crate::Error::Runtime)?
            .expect("holder has the stage key");
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = perm_rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        let applied = if inverse { inverse_perm(&perm) } else { perm };
        // masks are fresh per direction and sum to zero across holders
        let domain: &[u8] = if inverse {
            b"shuffle-mask-rev"
        } else {
            b"shuffle-mask-fwd"
        };
        let mut mask_rng = ctx
            .group_rng(subset_idx, invocation, domain)
            .map_err(crate::Error::Runtime)?
            .expect("holder has the stage key");
        let mut my_mask: Option<Vec<F>> = None;
        let mut mask_sum = vec![F::zero(); total];
        for (slot, h) in holders.iter().enumerate() {
            if slot + 1 == holders.len() {
                if *h == me {
                    my_mask = Some(mask_sum.iter().map(|&s| -s).collect());
                }
            } else {
                let mask: Vec<F> = (0..total).map(|_| F::sample(&mut mask_rng)).collect();
                for (acc, v) in mask_sum.iter_mut().zip(&mask) {
                    *acc = *acc + *v;
                }
                if *h == me {
                    my_mask = Some(mask);
                }
            }
        }
        let as_matrix: Vec<Vec<F>> = acc.chunks(n).map(|r| r.to_vec()).collect();
        let permuted = conjugate(&as_matrix, &applied);
        let mask = my_mask.expect("every holder gets a mask");
        Some(
            permuted
                .into_iter()
                .flatten()
                .zip(mask)
                .map(|(v, r)| v + r)
                .collect(),
        )
    } else {
        None
    };

    // Step 3: holders reshare their additive vectors; everyone sums the
    // received sharings back into a degree-t sharing.
    let mut outgoing = Vec::new();
    let mut own_dealt: Option<Vec<F>> = None;
    if let Some(beta) = beta {
        let dealt = ctx.deal_shares(&beta);
        for (dest, shares) in dealt.into_iter().enumerate() {
            if dest == me {
                own_dealt = Some(shares);
            } else {
                outgoing.push((dest, PeerCtx::<F>::encode_elems(TAG_SHUFFLE, &shares)));
            }
        }
    }
    let expect: Vec<PartyId> = holders.iter().copied().filter(|&h| h != me).collect();
    let inbox = ctx.exchange(outgoing, &expect).map_err(crate::Error::Runtime)?;
    let mut acc = own_dealt.unwrap_or_else(|| vec![F::zero(); total]);
    for (_, frame) in inbox {
        let elems =
            PeerCtx::<F>::decode_elems(TAG_SHUFFLE, &frame).map_err(crate::Error::Runtime)?;
        if elems.len() != total {
            return Err(RuntimeError::Consistency("reshare length mismatch".into()).into());
        }
        for (a, e) in acc.iter_mut().zip(elems) {
            *a = *a + e;
        }
    }
    Ok(acc.chunks(n).map(|r| r.iter().map(|&v| Sh(v)).collect()).collect())
}
