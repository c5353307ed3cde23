//! Building blocks over shares: multiplication, jointly random bits, secure
//! comparison, conditional selection, prefix-or and first-positive
//! selection.
//!
//! Everything is batched: one call processes a whole vector of independent
//! instances so the runtime charges a single round per protocol layer.
//! Comparison works by statistical masking — the compared difference is
//! shifted into a known range, blinded with shared random bits plus a
//! bounded high mask, opened, and the low bits are corrected with a
//! bitwise circuit against the shared mask bits. The opened value is
//! uniform to within the statistical security parameter and goes over the
//! wire as a plain message, not as a transcript opening.

use crate::field::PrimeField;
use crate::runtime::{PeerCtx, RuntimeError};
use crate::shamir::Sh;
use crate::Result;
use rand::Rng;

/// Frame tag for resharing/dealing traffic.
const TAG_DATA: u8 = 0xFE;

/// `x * y` on shares: local products of the degree-`t` sharings followed by
/// one resharing round (degree reduction).
pub fn mul_batch<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    xs: &[Sh<F>],
    ys: &[Sh<F>],
) -> Result<Vec<Sh<F>>> {
    assert_eq!(xs.len(), ys.len());
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    let prods: Vec<F> = xs.iter().zip(ys).map(|(x, y)| x.0 * y.0).collect();
    reshare_combine(ctx, &prods)
}

/// Deal fresh sharings of local degree-`2t` points and recombine with the
/// zero-interpolation weights over all peers.
fn reshare_combine<F: PrimeField>(ctx: &mut PeerCtx<F>, points: &[F]) -> Result<Vec<Sh<F>>> {
    let me = ctx.party();
    let dealt = ctx.deal_shares(points);
    let others: Vec<usize> = (0..ctx.kappa()).filter(|&p| p != me).collect();
    let outgoing = others
        .iter()
        .map(|&j| (j, PeerCtx::<F>::encode_elems(TAG_DATA, &dealt[j])))
        .collect();
    let inbox = ctx.exchange(outgoing, &others)?;
    let lag = ctx.shamir().lagrange_all().to_vec();
    let mut acc: Vec<F> = dealt[me].iter().map(|&v| v * lag[me]).collect();
    for (from, frame) in inbox {
        let elems = PeerCtx::<F>::decode_elems(TAG_DATA, &frame).map_err(crate::Error::Runtime)?;
        if elems.len() != points.len() {
            return Err(RuntimeError::Consistency("resharing length mismatch".into()).into());
        }
        for (a, e) in acc.iter_mut().zip(elems) {
            *a = *a + e * lag[from];
        }
    }
    Ok(acc.into_iter().map(Sh).collect())
}

/// Jointly random shared bits, unknown to every peer: each peer deals a
/// sharing of a private coin and the coins are combined with an xor tree.
pub fn rand_bits_batch<F: PrimeField>(ctx: &mut PeerCtx<F>, n: usize) -> Result<Vec<Sh<F>>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let me = ctx.party();
    let my_bits: Vec<F> = (0..n)
        .map(|_| F::from_u64(ctx.rng().gen_range(0..2u64)))
        .collect();
    let dealt = ctx.deal_shares(&my_bits);
    let others: Vec<usize> = (0..ctx.kappa()).filter(|&p| p != me).collect();
    let outgoing = others
        .iter()
        .map(|&j| (j, PeerCtx::<F>::encode_elems(TAG_DATA, &dealt[j])))
        .collect();
    let inbox = ctx.exchange(outgoing, &others)?;
    let mut layers: Vec<Vec<Sh<F>>> = vec![Vec::new(); ctx.kappa()];
    layers[me] = dealt[me].iter().copied().map(Sh).collect();
    for (from, frame) in inbox {
        let elems = PeerCtx::<F>::decode_elems(TAG_DATA, &frame).map_err(crate::Error::Runtime)?;
        if elems.len() != n {
            return Err(RuntimeError::Consistency("bit-deal length mismatch".into()).into());
        }
        layers[from] = elems.into_iter().map(Sh).collect();
    }
    // xor-combine the kappa contributions pairwise
    while layers.len() > 1 {
        let mut next = Vec::with_capacity(layers.len().div_ceil(2));
        let mut iter = layers.into_iter();
        while let Some(a) = iter.next() {
            match iter.next() {
                Some(b) => next.push(xor_batch(ctx, &a, &b)?),
                None => next.push(a),
            }
        }
        layers = next;
    }
    Ok(layers.pop().unwrap())
}

/// `a xor b` for shared bits: `a + b - 2ab`.
pub fn xor_batch<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    a: &[Sh<F>],
    b: &[Sh<F>],
) -> Result<Vec<Sh<F>>> {
    let ab = mul_batch(ctx, a, b)?;
    let two = F::from_u64(2);
    Ok(a.iter()
        .zip(b)
        .zip(ab)
        .map(|((&x, &y), xy)| x + y - xy * two)
        .collect())
}

/// `a or b` for shared bits: `a + b - ab`.
pub fn or_batch<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    a: &[Sh<F>],
    b: &[Sh<F>],
) -> Result<Vec<Sh<F>>> {
    let ab = mul_batch(ctx, a, b)?;
    Ok(a.iter().zip(b).zip(ab).map(|((&x, &y), xy)| x + y - xy).collect())
}

/// `b ? x : y` elementwise: `b * (x - y) + y`.
pub fn cond_select_batch<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    bits: &[Sh<F>],
    xs: &[Sh<F>],
    ys: &[Sh<F>],
) -> Result<Vec<Sh<F>>> {
    assert!(bits.len() == xs.len() && xs.len() == ys.len());
    let diff: Vec<Sh<F>> = xs.iter().zip(ys).map(|(&x, &y)| x - y).collect();
    let picked = mul_batch(ctx, bits, &diff)?;
    Ok(picked.into_iter().zip(ys).map(|(p, &y)| p + y).collect())
}

/// Multiplicative inverses of shared values via a random blind: open
/// `x * r` for jointly random `r`, divide out publicly.
pub fn inv_batch<F: PrimeField>(ctx: &mut PeerCtx<F>, xs: &[Sh<F>]) -> Result<Vec<Sh<F>>> {
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    let blinds = ctx.prss_field(xs.len())?;
    let masked = mul_batch(ctx, xs, &blinds)?;
    let opened = ctx.open_masked_batch(&masked)?;
    let mut out = Vec::with_capacity(xs.len());
    for (w, r) in opened.into_iter().zip(blinds) {
        let wi = w
            .inv()
            .ok_or_else(|| RuntimeError::Internal("zero value in blinded inversion".into()))?;
        out.push(r * wi);
    }
    Ok(out)
}

/// Inclusive running or over shared bits, computed with a log-depth
/// doubling scan (one multiplication layer per doubling step).
pub fn prefix_or<F: PrimeField>(ctx: &mut PeerCtx<F>, bits: &[Sh<F>]) -> Result<Vec<Sh<F>>> {
    Ok(prefix_or_segmented(ctx, &[bits.to_vec()])?.pop().unwrap())
}

/// Prefix-or over many independent segments, batching every doubling step
/// across segments.
pub fn prefix_or_segmented<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    segments: &[Vec<Sh<F>>],
) -> Result<Vec<Vec<Sh<F>>>> {
    let mut acc: Vec<Vec<Sh<F>>> = segments.to_vec();
    let max_len = acc.iter().map(Vec::len).max().unwrap_or(0);
    let mut shift = 1;
    while shift < max_len {
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        let mut slots = Vec::new();
        for (si, seg) in acc.iter().enumerate() {
            for j in shift..seg.len() {
                lhs.push(seg[j]);
                rhs.push(seg[j - shift]);
                slots.push((si, j));
            }
        }
        let ors = or_batch(ctx, &lhs, &rhs)?;
        for ((si, j), v) in slots.into_iter().zip(ors) {
            acc[si][j] = v;
        }
        shift *= 2;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

/// Check the field leaves room for a masked comparison at `sp` value bits.
fn check_budget<F: PrimeField>(ctx: &PeerCtx<F>, sp: u32) {
    let slack = 64 - (ctx.prss_subset_count() as u64).leading_zeros();
    let need = sp + 1 + ctx.config().stat_sec + slack + 1;
    assert!(
        need < F::modulus_bits(),
        "comparison bit budget {need} exceeds field capacity {} (sp = {sp})",
        F::modulus_bits()
    );
}

/// `[w < 0]` for signed `w` with `|w| < 2^sp`.
///
/// Shift to `z = w + 2^sp`, blind with `sp` shared random bits plus a
/// bounded high mask, open, and recover the top bit of `z` from the opened
/// low bits and a bitwise greater-than against the mask bits.
pub fn ltz_batch<F: PrimeField>(ctx: &mut PeerCtx<F>, ws: &[Sh<F>], sp: u32) -> Result<Vec<Sh<F>>> {
    if ws.is_empty() {
        return Ok(Vec::new());
    }
    check_budget(ctx, sp);
    let n = ws.len();
    let spu = sp as usize;
    let bits = rand_bits_batch(ctx, n * spu)?;
    let sec = ctx.config().stat_sec;
    let high = ctx.prss_bounded(n, sec)?;
    let two_sp = F::pow2(sp);

    let mut masked = Vec::with_capacity(n);
    for k in 0..n {
        let z = ws[k] + two_sp;
        let mut m = z + high[k] * two_sp;
        for i in 0..spu {
            m = m + bits[k * spu + i] * F::pow2(i as u32);
        }
        masked.push(m);
    }
    let opened = ctx.open_masked_batch(&masked)?;

    // public low bits of each opened value
    let mut pub_bits: Vec<Vec<bool>> = Vec::with_capacity(n);
    let mut c_low: Vec<F> = Vec::with_capacity(n);
    for c in &opened {
        let bits: Vec<bool> = (0..sp).map(|i| c.bit(i)).collect();
        let mut low = F::zero();
        for (i, b) in bits.iter().enumerate() {
            if *b {
                low = low + F::pow2(i as u32);
            }
        }
        pub_bits.push(bits);
        c_low.push(low);
    }

    // [R' > c_low] per instance
    let wraps = bitwise_gt_public(ctx, &bits, &pub_bits, spu)?;

    let inv_two_sp = two_sp.inv().expect("2^sp invertible");
    let one = F::one();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut r_low = Sh(F::zero());
        for i in 0..spu {
            r_low = r_low + bits[k * spu + i] * F::pow2(i as u32);
        }
        let z = ws[k] + two_sp;
        let z_low = Sh(F::zero()) + c_low[k] - r_low.0 + (wraps[k] * two_sp).0;
        let b = (z - z_low) * inv_two_sp; // top bit of z: [w >= 0]
        out.push(Sh(one) - b);
    }
    Ok(out)
}

/// `[R > c]` where `R` is given by shared bits (little-endian groups of
/// `width` per instance) and `c` by public bits.
fn bitwise_gt_public<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    r_bits: &[Sh<F>],
    c_bits: &[Vec<bool>],
    width: usize,
) -> Result<Vec<Sh<F>>> {
    let n = c_bits.len();
    let one = F::one();
    // difference indicators, most significant first
    let mut segments: Vec<Vec<Sh<F>>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut seg = Vec::with_capacity(width);
        for i in (0..width).rev() {
            let r = r_bits[k * width + i];
            seg.push(if c_bits[k][i] { Sh(one) - r } else { r });
        }
        segments.push(seg);
    }
    let prefixes = prefix_or_segmented(ctx, &segments)?;
    // first set position, msb first; there R > c iff the r bit is 1
    let mut firsts = Vec::with_capacity(n * width);
    let mut rs = Vec::with_capacity(n * width);
    for k in 0..n {
        let p = &prefixes[k];
        for j in 0..width {
            let e = if j == 0 { p[0] } else { p[j] - p[j - 1] };
            firsts.push(e);
            rs.push(r_bits[k * width + (width - 1 - j)]);
        }
    }
    let picked = mul_batch(ctx, &firsts, &rs)?;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = Sh(F::zero());
        for j in 0..width {
            acc = acc + picked[k * width + j];
        }
        out.push(acc);
    }
    Ok(out)
}

/// `[x > 0]` for signed `x` with `|x| < 2^s`.
pub fn gtz_batch<F: PrimeField>(ctx: &mut PeerCtx<F>, xs: &[Sh<F>], s: u32) -> Result<Vec<Sh<F>>> {
    let negs: Vec<Sh<F>> = xs.iter().map(|&x| -x).collect();
    ltz_batch(ctx, &negs, s)
}

/// Strict comparison `[x > y]` for signed operands with `|x|, |y| < 2^s`.
pub fn greater_than_batch<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    pairs: &[(Sh<F>, Sh<F>)],
    s: u32,
) -> Result<Vec<Sh<F>>> {
    let diffs: Vec<Sh<F>> = pairs.iter().map(|&(x, y)| y - x).collect();
    ltz_batch(ctx, &diffs, s + 1)
}

/// Unit indicator of the first strictly positive entry (all zero when none).
/// Entries are signed with `|u| < 2^s`.
pub fn sel_min<F: PrimeField>(ctx: &mut PeerCtx<F>, u: &[Sh<F>], s: u32) -> Result<Vec<Sh<F>>> {
    let bits = gtz_batch(ctx, u, s)?;
    first_one_indicator(ctx, &bits)
}

/// Unit indicator of the first 1 in a vector of shared bits.
pub fn first_one_indicator<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    bits: &[Sh<F>],
) -> Result<Vec<Sh<F>>> {
    if bits.is_empty() {
        return Ok(Vec::new());
    }
    let p = prefix_or(ctx, bits)?;
    let mut out = Vec::with_capacity(bits.len());
    out.push(p[0]);
    for i in 1..bits.len() {
        out.push(p[i] - p[i - 1]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::F127;
    use crate::runtime::{run_session, OpenLabel, SessionConfig, SessionOutcome};
    use crate::shamir::Shamir;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Deal shares of signed inputs to the peers and run a session with
    /// test hooks on.
    fn mpc<R: Send>(
        seed: u64,
        inputs: &[i128],
        f: impl Fn(&mut PeerCtx<F127>, Vec<Sh<F127>>) -> crate::Result<R> + Sync,
    ) -> (Vec<R>, crate::runtime::Transcript) {
        let cfg = SessionConfig::default().with_seed(seed).with_test_hooks();
        let shamir = Shamir::<F127>::new(cfg.kappa, cfg.threshold).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0xDEA1);
        let mut per_peer: Vec<Vec<Sh<F127>>> = vec![Vec::new(); cfg.kappa];
        for &x in inputs {
            for (p, s) in shamir.share_i128(x, &mut rng).unwrap().into_iter().enumerate() {
                per_peer[p].push(Sh(s));
            }
        }
        let SessionOutcome {
            outputs,
            transcript,
        } = run_session(&cfg, per_peer, f).unwrap();
        (outputs, transcript)
    }

    fn opened_i128(t: &crate::runtime::Transcript) -> Vec<i128> {
        t.events
            .iter()
            .map(|e| {
                F127::from_limbs_le(e.limbs)
                    .to_i128()
                    .expect("test value fits")
            })
            .collect()
    }

    #[test]
    fn mul_matches_plaintext() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let xs: Vec<i128> = (0..100).map(|_| rng.gen_range(-(1i128 << 40)..(1 << 40))).collect();
        let ys: Vec<i128> = (0..100).map(|_| rng.gen_range(-(1i128 << 40)..(1 << 40))).collect();
        let mut inputs = xs.clone();
        inputs.extend(&ys);
        let (_, t) = mpc(1, &inputs, |ctx, sh| {
            let (a, b) = sh.split_at(100);
            let prod = mul_batch(ctx, a, b)?;
            ctx.test_open_batch(&prod)?;
            Ok(())
        });
        let got = opened_i128(&t);
        for k in 0..100 {
            assert_eq!(got[k], xs[k] * ys[k], "product {k}");
        }
    }

    #[test]
    fn mul_absorbing_and_identity() {
        let (_, t) = mpc(2, &[0, 1, 12345], |ctx, sh| {
            let zero_y = mul_batch(ctx, &[sh[0]], &[sh[2]])?;
            let one_y = mul_batch(ctx, &[sh[1]], &[sh[2]])?;
            ctx.test_open_batch(&zero_y)?;
            ctx.test_open_batch(&one_y)?;
            Ok(())
        });
        assert_eq!(opened_i128(&t), vec![0, 12345]);
    }

    #[test]
    fn mul_is_single_round() {
        let (outputs, _) = mpc(3, &[3, 4], |ctx, sh| {
            let before = ctx.stats().rounds;
            mul_batch(ctx, &[sh[0]], &[sh[1]])?;
            Ok(ctx.stats().rounds - before)
        });
        assert!(outputs.iter().all(|&d| d == 1));
    }

    #[test]
    fn linear_combinations_are_free() {
        let (outputs, _) = mpc(4, &[5, -3], |ctx, sh| {
            let before = ctx.stats().bytes_sent;
            let a = F127::from_i128(2);
            let b = F127::from_i128(7);
            let lin = sh[0] * a + sh[1] * b;
            let local_traffic = ctx.stats().bytes_sent - before;
            let v = ctx.test_open_batch(&[lin])?[0];
            Ok((local_traffic, v.to_i128().unwrap()))
        });
        for (traffic, v) in outputs {
            assert_eq!(traffic, 0);
            assert_eq!(v, 2 * 5 + 7 * (-3));
        }
    }

    #[test]
    fn comparison_examples() {
        let (_, t) = mpc(5, &[5, 3, 4, 4], |ctx, sh| {
            let bits = greater_than_batch(ctx, &[(sh[0], sh[1]), (sh[2], sh[3])], 8)?;
            ctx.test_open_batch(&bits)?;
            Ok(())
        });
        assert_eq!(opened_i128(&t), vec![1, 0]);
    }

    #[test]
    fn comparison_random_signed() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let pairs: Vec<(i128, i128)> = (0..200)
            .map(|_| {
                (
                    rng.gen_range(-(1i128 << 30)..(1 << 30)),
                    rng.gen_range(-(1i128 << 30)..(1 << 30)),
                )
            })
            .collect();
        let mut inputs = Vec::new();
        for (x, y) in &pairs {
            inputs.push(*x);
            inputs.push(*y);
        }
        let (_, t) = mpc(6, &inputs, |ctx, sh| {
            let ps: Vec<_> = sh.chunks(2).map(|c| (c[0], c[1])).collect();
            let bits = greater_than_batch(ctx, &ps, 31)?;
            ctx.test_open_batch(&bits)?;
            Ok(())
        });
        let got = opened_i128(&t);
        for (k, (x, y)) in pairs.iter().enumerate() {
            assert_eq!(got[k], i128::from(x > y), "pair {k}: {x} > {y}");
        }
    }

    #[test]
    fn cond_select_cases() {
        let (_, t) = mpc(7, &[1, 0, 10, 20, 9, 9], |ctx, sh| {
            let sel = cond_select_batch(
                ctx,
                &[sh[0], sh[1], sh[0]],
                &[sh[2], sh[2], sh[4]],
                &[sh[3], sh[3], sh[5]],
            )?;
            ctx.test_open_batch(&sel)?;
            Ok(())
        });
        assert_eq!(opened_i128(&t), vec![10, 20, 9]);
    }

    #[test]
    fn prefix_or_examples() {
        let (_, t) = mpc(8, &[0, 1, 0, 0, 0, 0], |ctx, sh| {
            let p1 = prefix_or(ctx, &sh[..3])?;
            let p2 = prefix_or(ctx, &sh[3..])?;
            ctx.test_open_batch(&p1)?;
            ctx.test_open_batch(&p2)?;
            Ok(())
        });
        assert_eq!(opened_i128(&t), vec![0, 1, 1, 0, 0, 0]);
    }

    #[test]
    fn prefix_or_random_vs_plaintext() {
        let mut rng = ChaCha12Rng::seed_from_u64(15);
        let bits: Vec<i128> = (0..32).map(|_| rng.gen_range(0..2)).collect();
        let (_, t) = mpc(9, &bits, |ctx, sh| {
            let p = prefix_or(ctx, &sh)?;
            ctx.test_open_batch(&p)?;
            Ok(())
        });
        let got = opened_i128(&t);
        let mut acc = 0;
        for (k, b) in bits.iter().enumerate() {
            acc |= b;
            assert_eq!(got[k], acc);
        }
    }

    #[test]
    fn sel_min_examples() {
        let (_, t) = mpc(10, &[0, 7, 0, 2, 0, 0, 0], |ctx, sh| {
            let f1 = sel_min(ctx, &sh[..4], 8)?;
            let f2 = sel_min(ctx, &sh[4..], 8)?;
            ctx.test_open_batch(&f1)?;
            ctx.test_open_batch(&f2)?;
            Ok(())
        });
        assert_eq!(opened_i128(&t), vec![0, 1, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn sel_min_random_vs_scan() {
        let mut rng = ChaCha12Rng::seed_from_u64(16);
        for round in 0..6 {
            let n = rng.gen_range(1..12);
            let u: Vec<i128> = (0..n).map(|_| rng.gen_range(-50..50)).collect();
            let (_, t) = mpc(20 + round, &u, |ctx, sh| {
                let f = sel_min(ctx, &sh, 8)?;
                ctx.test_open_batch(&f)?;
                Ok(())
            });
            let got = opened_i128(&t);
            let expect_idx = u.iter().position(|&v| v > 0);
            for (k, g) in got.iter().enumerate() {
                assert_eq!(*g, i128::from(Some(k) == expect_idx), "u={u:?}");
            }
        }
    }

    #[test]
    fn rand_bits_are_bits() {
        let (_, t) = mpc(12, &[], |ctx, _| {
            let bits = rand_bits_batch(ctx, 64)?;
            ctx.test_open_batch(&bits)?;
            Ok(())
        });
        let got = opened_i128(&t);
        assert!(got.iter().all(|&b| b == 0 || b == 1));
        // sanity: not constant
        assert!(got.iter().any(|&b| b == 0) && got.iter().any(|&b| b == 1));
    }

    #[test]
    fn inversion_round_trip() {
        let (_, t) = mpc(13, &[17, -4], |ctx, sh| {
            let invs = inv_batch(ctx, &sh)?;
            let check = mul_batch(ctx, &sh, &invs)?;
            ctx.test_open_batch(&check)?;
            Ok(())
        });
        assert_eq!(opened_i128(&t), vec![1, 1]);
    }

    #[test]
    fn test_only_openings_rejected_without_hooks() {
        let cfg = SessionConfig::default().with_seed(1);
        let res: crate::Result<SessionOutcome<()>> =
            run_session(&cfg, vec![(), (), ()], |ctx: &mut PeerCtx<F127>, _| {
                ctx.open_batch(&[Sh::constant(F127::one())], OpenLabel::TestOnly)?;
                Ok(())
            });
        assert!(res.is_err());
    }
}
