//! Secret-shared simplex with integer pivoting.
//!
//! The tableau, the pivot choice, the basis bookkeeping and the solution
//! all stay in shares; the only public value is one termination bit per
//! optimality check, so a run reveals exactly its iteration count. Pivot
//! rules mirror the plaintext solver (first positive objective entry,
//! cross-multiplied ratio test with ties to the smaller row), which makes
//! the two produce identical pivot sequences on the same input — the
//! property the oracle tests and the leakage audit rely on.
//!
//! Division by the previous pivot in the fraction-free update is exact over
//! the integers, so multiplying by its field inverse computes the true
//! integer quotient as long as magnitudes stay below the field size.

use crate::field::PrimeField;
use crate::plain::PlainTableau;
use crate::primitives::{
    cond_select_batch, first_one_indicator, gtz_batch, inv_batch, ltz_batch, mul_batch, sel_min,
};
use crate::runtime::{OpenLabel, PeerCtx};
use crate::shamir::{Sh, Shamir};
use crate::{Error, Result};
use rand::RngCore;

/// A secret-shared tableau with public shape; same layout as
/// [`PlainTableau`]: objective row first, bound column last.
#[derive(Debug, Clone)]
pub struct SharedTableau<F> {
    pub m: usize,
    pub n_struct: usize,
    pub n_slack: usize,
    pub rows: Vec<Vec<Sh<F>>>,
}

impl<F: PrimeField> SharedTableau<F> {
    pub fn n(&self) -> usize {
        self.n_struct + self.n_slack
    }

    pub fn bound_col(&self) -> usize {
        self.n()
    }

    /// Deal a plaintext tableau into per-peer shared tableaus (test and
    /// harness utility; in the pipeline the tableau is built in-protocol).
    pub fn deal<R: RngCore + ?Sized>(
        plain: &PlainTableau,
        shamir: &Shamir<F>,
        rng: &mut R,
    ) -> Vec<SharedTableau<F>> {
        let kappa = shamir.kappa();
        let mut per_peer: Vec<SharedTableau<F>> = (0..kappa)
            .map(|_| SharedTableau {
                m: plain.m,
                n_struct: plain.n_struct,
                n_slack: plain.n_slack,
                rows: Vec::with_capacity(plain.m + 1),
            })
            .collect();
        for row in &plain.rows {
            let mut peer_rows: Vec<Vec<Sh<F>>> = (0..kappa).map(|_| Vec::new()).collect();
            for &v in row {
                let shares = shamir.share(F::from_i128(v), rng);
                for (p, s) in shares.into_iter().enumerate() {
                    peer_rows[p].push(Sh(s));
                }
            }
            for (p, r) in peer_rows.into_iter().enumerate() {
                per_peer[p].rows.push(r);
            }
        }
        per_peer
    }
}

/// Comparison sizing for one instance family.
#[derive(Debug, Clone, Copy)]
pub struct SimplexParams {
    /// Every |tableau entry| stays below `2^entry_bits` throughout the run.
    pub entry_bits: u32,
    /// Iteration cap; exceeding it signals degeneracy or a field too small.
    pub iter_cap: usize,
}

impl SimplexParams {
    pub fn new(entry_bits: u32, iter_cap: usize) -> Self {
        SimplexParams {
            entry_bits,
            iter_cap,
        }
    }

    /// Bit bound for cross-multiplied ratio comparisons.
    pub fn cross_bits(&self) -> u32 {
        2 * self.entry_bits + 1
    }
}

#[derive(Debug, Clone)]
pub struct SimplexOutcome<F> {
    /// Scaled solution over all variables (structural then slack).
    pub x_scaled: Vec<Sh<F>>,
    /// Scaled objective value.
    pub z: Sh<F>,
    /// Common denominator (the final pivot).
    pub denom: Sh<F>,
    pub iterations: usize,
}

/// Unit indicator (over all `n` columns) of the entering column under
/// Bland's rule: the first column with a positive objective entry; all-zero
/// when the tableau is optimal.
pub fn select_pivot_column<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    t: &SharedTableau<F>,
    params: &SimplexParams,
) -> Result<Vec<Sh<F>>> {
    sel_min(ctx, &t.rows[0][..t.n()], params.entry_bits)
}

/// Obliviously extract the entering column `T * col_indicator` (all rows,
/// objective included).
pub fn extract_column<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    t: &SharedTableau<F>,
    col_ind: &[Sh<F>],
) -> Result<Vec<Sh<F>>> {
    let n = t.n();
    let mut lhs = Vec::with_capacity((t.m + 1) * n);
    let mut rhs = Vec::with_capacity((t.m + 1) * n);
    for row in &t.rows {
        for j in 0..n {
            lhs.push(row[j]);
            rhs.push(col_ind[j]);
        }
    }
    let prods = mul_batch(ctx, &lhs, &rhs)?;
    Ok(prods
        .chunks(n)
        .map(|c| c.iter().fold(Sh(F::zero()), |a, &b| a + b))
        .collect())
}

/// Ratio-test winner as a unit indicator over the `m` constraint rows.
///
/// Rows with non-positive column entry are ineligible; among eligible rows
/// the smallest `b_i / D_i` wins with ties to the smaller index, decided by
/// cross-multiplication inside a selection tournament. Also returns the
/// shared "any eligible row" bit (zero means the program is unbounded,
/// which cannot happen for packing-shaped inputs).
pub fn select_pivot_row<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    t: &SharedTableau<F>,
    d_col: &[Sh<F>],
    params: &SimplexParams,
) -> Result<(Vec<Sh<F>>, Sh<F>)> {
    let m = t.m;
    let bc = t.bound_col();
    let nums: Vec<Sh<F>> = (1..=m).map(|i| t.rows[i][bc]).collect();
    let dens: Vec<Sh<F>> = (1..=m).map(|i| d_col[i]).collect();
    let elig = gtz_batch(ctx, &dens, params.entry_bits)?;

    struct Cand<F> {
        num: Sh<F>,
        den: Sh<F>,
        elig: Sh<F>,
        ind: Vec<Sh<F>>,
    }
    let mut cands: Vec<Cand<F>> = (0..m)
        .map(|i| {
            let mut ind = vec![Sh(F::zero()); m];
            ind[i] = Sh(F::one());
            Cand {
                num: nums[i],
                den: dens[i],
                elig: elig[i],
                ind,
            }
        })
        .collect();

    while cands.len() > 1 {
        let pair_count = cands.len() / 2;
        let mut rest = cands.split_off(pair_count * 2);
        let mut lhs_num = Vec::with_capacity(pair_count);
        let mut lhs_den = Vec::with_capacity(pair_count);
        let mut rhs_num = Vec::with_capacity(pair_count);
        let mut rhs_den = Vec::with_capacity(pair_count);
        for p in 0..pair_count {
            lhs_num.push(cands[2 * p].num);
            lhs_den.push(cands[2 * p].den);
            rhs_num.push(cands[2 * p + 1].num);
            rhs_den.push(cands[2 * p + 1].den);
        }
        // cross_a = num_a * den_b, cross_b = num_b * den_a
        let mut mul_l = lhs_num.clone();
        mul_l.extend_from_slice(&rhs_num);
        let mut mul_r = rhs_den.clone();
        mul_r.extend_from_slice(&lhs_den);
        let crosses = mul_batch(ctx, &mul_l, &mul_r)?;
        let (cross_a, cross_b) = crosses.split_at(pair_count);
        // right strictly better: cross_b < cross_a
        let diffs: Vec<Sh<F>> = cross_b
            .iter()
            .zip(cross_a)
            .map(|(&b, &a)| b - a)
            .collect();
        let lt = ltz_batch(ctx, &diffs, params.cross_bits() + 1)?;
        let elig_a: Vec<Sh<F>> = (0..pair_count).map(|p| cands[2 * p].elig).collect();
        let elig_b: Vec<Sh<F>> = (0..pair_count).map(|p| cands[2 * p + 1].elig).collect();
        let both = mul_batch(ctx, &elig_a, &elig_b)?;
        let strict = mul_batch(ctx, &both, &lt)?;
        // take the right candidate iff it is eligible and either the left
        // is not or the right is strictly better
        let take_b: Vec<Sh<F>> = (0..pair_count)
            .map(|p| elig_b[p] - both[p] + strict[p])
            .collect();
        // batched select of (num, den, ind) per pair
        let mut sel_bits = Vec::new();
        let mut sel_x = Vec::new();
        let mut sel_y = Vec::new();
        for p in 0..pair_count {
            let (a, b) = (&cands[2 * p], &cands[2 * p + 1]);
            sel_bits.push(take_b[p]);
            sel_x.push(b.num);
            sel_y.push(a.num);
            sel_bits.push(take_b[p]);
            sel_x.push(b.den);
            sel_y.push(a.den);
            for i in 0..m {
                sel_bits.push(take_b[p]);
                sel_x.push(b.ind[i]);
                sel_y.push(a.ind[i]);
            }
        }
        let selected = cond_select_batch(ctx, &sel_bits, &sel_x, &sel_y)?;
        let mut merged = Vec::with_capacity(pair_count + rest.len());
        let stride = 2 + m;
        for p in 0..pair_count {
            let chunk = &selected[p * stride..(p + 1) * stride];
            merged.push(Cand {
                num: chunk[0],
                den: chunk[1],
                elig: elig_a[p] + elig_b[p] - both[p],
                ind: chunk[2..].to_vec(),
            });
        }
        merged.append(&mut rest);
        cands = merged;
    }
    let winner = cands.pop().expect("at least one constraint row");
    Ok((winner.ind, winner.elig))
}

/// Apply one fraction-free pivot obliviously. Consumes the extracted pivot
/// column `d_col`, the row/column unit indicators and the previous pivot;
/// returns the new pivot (the new common denominator). The pivot row stays,
/// every other entry becomes `(pivot * entry - col * pivot_row) / prev`.
#[allow(clippy::too_many_arguments)]
pub fn pivot_update<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    t: &mut SharedTableau<F>,
    basis: &mut [Vec<Sh<F>>],
    row_ind: &[Sh<F>],
    col_ind: &[Sh<F>],
    d_col: &[Sh<F>],
    prev_pivot: Sh<F>,
) -> Result<Sh<F>> {
    let m = t.m;
    let n = t.n();
    let width = n + 1;

    // pivot row R_j = sum_i rho_i T(i, j), and pivot value P = rho . D
    let mut lhs = Vec::with_capacity(m * width + m);
    let mut rhs = Vec::with_capacity(m * width + m);
    for i in 1..=m {
        for j in 0..width {
            lhs.push(row_ind[i - 1]);
            rhs.push(t.rows[i][j]);
        }
    }
    for i in 1..=m {
        lhs.push(row_ind[i - 1]);
        rhs.push(d_col[i]);
    }
    let prods = mul_batch(ctx, &lhs, &rhs)?;
    let mut pivot_row = vec![Sh(F::zero()); width];
    for i in 0..m {
        for j in 0..width {
            pivot_row[j] = pivot_row[j] + prods[i * width + j];
        }
    }
    let mut pivot = Sh(F::zero());
    for i in 0..m {
        pivot = pivot + prods[m * width + i];
    }

    // scale by the inverse of the previous pivot once, up front
    let invp = inv_batch(ctx, &[prev_pivot])?[0];
    let mut scale_l = vec![invp; 1 + d_col.len()];
    let mut scale_r = vec![pivot];
    scale_r.extend_from_slice(d_col);
    scale_l.truncate(scale_r.len());
    let scaled = mul_batch(ctx, &scale_l, &scale_r)?;
    let p_scaled = scaled[0];
    let d_scaled = &scaled[1..];

    // upd(i,j) = p_scaled * T(i,j) - d_scaled_i * R_j
    let total = (m + 1) * width;
    let mut l1 = Vec::with_capacity(2 * total);
    let mut r1 = Vec::with_capacity(2 * total);
    for i in 0..=m {
        for j in 0..width {
            l1.push(p_scaled);
            r1.push(t.rows[i][j]);
        }
    }
    for i in 0..=m {
        for j in 0..width {
            l1.push(d_scaled[i]);
            r1.push(pivot_row[j]);
        }
    }
    let prods2 = mul_batch(ctx, &l1, &r1)?;
    let (p_terms, d_terms) = prods2.split_at(total);

    // blend: the pivot row keeps its old entries
    let mut bl = Vec::with_capacity(m * width);
    let mut br = Vec::with_capacity(m * width);
    for i in 1..=m {
        for j in 0..width {
            let upd = p_terms[i * width + j] - d_terms[i * width + j];
            bl.push(row_ind[i - 1]);
            br.push(t.rows[i][j] - upd);
        }
    }
    let keep = mul_batch(ctx, &bl, &br)?;
    for j in 0..width {
        t.rows[0][j] = p_terms[j] - d_terms[j];
    }
    for i in 1..=m {
        for j in 0..width {
            let upd = p_terms[i * width + j] - d_terms[i * width + j];
            t.rows[i][j] = upd + keep[(i - 1) * width + j];
        }
    }

    // basis(i, j) <- basis + rho_i (gamma_j - basis(i, j))
    let mut bbl = Vec::with_capacity(m * n);
    let mut bbr = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            bbl.push(row_ind[i]);
            bbr.push(col_ind[j] - basis[i][j]);
        }
    }
    let delta = mul_batch(ctx, &bbl, &bbr)?;
    for i in 0..m {
        for j in 0..n {
            basis[i][j] = basis[i][j] + delta[i * n + j];
        }
    }
    Ok(pivot)
}

/// Run the shared simplex to optimality.
///
/// Opens exactly `iterations + 1` termination bits and nothing else; the
/// result reconstructs to what [`crate::plain::exact_simplex`] returns on
/// the reconstructed tableau, iteration count included.
pub fn pp_simplex<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    t: &SharedTableau<F>,
    params: &SimplexParams,
) -> Result<SimplexOutcome<F>> {
    let m = t.m;
    let n = t.n();
    let mut work = t.clone();
    // slack identity basis
    let mut basis: Vec<Vec<Sh<F>>> = (0..m)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j == t.n_struct + i {
                        Sh(F::one())
                    } else {
                        Sh(F::zero())
                    }
                })
                .collect()
        })
        .collect();
    let mut denom = Sh(F::one());
    let mut iterations = 0usize;
    let one = F::one();
    loop {
        let col_ind = select_pivot_column(ctx, &work, params)?;
        let improvable = col_ind.iter().fold(Sh(F::zero()), |a, &b| a + b);
        let term = ctx
            .open_u64(Sh(one) - improvable, OpenLabel::SimplexTerminationBit)
            .map_err(Error::Runtime)?;
        if term == 1 {
            break;
        }
        if term != 0 {
            return Err(Error::Runtime(crate::runtime::RuntimeError::Consistency(
                "termination bit out of range".into(),
            )));
        }
        if iterations >= params.iter_cap {
            return Err(Error::IterationCap(params.iter_cap));
        }
        let d_col = extract_column(ctx, &work, &col_ind)?;
        let (row_ind, elig_any) = select_pivot_row(ctx, &work, &d_col, params)?;
        if ctx.config().test_hooks {
            let ok = ctx.test_open_batch(&[elig_any]).map_err(Error::Runtime)?[0];
            if ok.is_zero() {
                return Err(Error::Unbounded);
            }
        }
        denom = pivot_update(ctx, &mut work, &mut basis, &row_ind, &col_ind, &d_col, denom)?;
        iterations += 1;
    }

    // solution read-off: x_j = sum_i basis(i, j) * b_i
    let bc = work.bound_col();
    let mut lhs = Vec::with_capacity(m * n);
    let mut rhs = Vec::with_capacity(m * n);
    for (i, basis_row) in basis.iter().enumerate() {
        for j in 0..n {
            lhs.push(basis_row[j]);
            rhs.push(work.rows[i + 1][bc]);
        }
    }
    let prods = mul_batch(ctx, &lhs, &rhs)?;
    let mut x_scaled = vec![Sh(F::zero()); n];
    for i in 0..m {
        for (j, x) in x_scaled.iter_mut().enumerate() {
            *x = *x + prods[i * n + j];
        }
    }
    Ok(SimplexOutcome {
        x_scaled,
        z: -work.rows[0][bc],
        denom,
        iterations,
    })
}
