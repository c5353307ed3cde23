//! Secret-shared branch-and-bound.
//!
//! Subproblems carry a shared tableau, the parent relaxation's value as a
//! shared rational bound, and the shared 0/1 vector of variables forced to
//! one along the path. Two public control bits steer the loop and are the
//! leaked tree structure: the dequeue bound check (explore or prune) and,
//! after solving a node, whether the relaxation was fractional (branch or
//! leaf). Children of an integral node would always fail the bound check,
//! so they are never created — keeping the published tree identical to the
//! plaintext algorithm's trace.
//!
//! Everything else stays secret: solutions, bounds, the incumbent, and
//! which variable a branch fixes.

use crate::field::PrimeField;
use crate::ppsimplex::{pp_simplex, SharedTableau, SimplexParams};
use crate::primitives::{
    cond_select_batch, first_one_indicator, greater_than_batch, gtz_batch, mul_batch,
};
use crate::runtime::{OpenLabel, PeerCtx};
use crate::shamir::Sh;
use crate::{Error, Result};
use crate::trace::TreeTrace;
use std::collections::VecDeque;

/// Sizing for one branch-and-bound run.
#[derive(Debug, Clone, Copy)]
pub struct BbParams {
    /// Public integer bound on the objective (the pool size for exchange
    /// instances); seeds the root bound and sizes the floor ladder.
    pub value_bound: u64,
    pub simplex: SimplexParams,
}

impl BbParams {
    pub fn new(value_bound: u64, simplex: SimplexParams) -> Self {
        BbParams {
            value_bound,
            simplex,
        }
    }

    /// Bit bound for comparisons against `k * denom` and the bound check.
    fn value_bits(&self) -> u32 {
        self.simplex.entry_bits + 64 - u64::leading_zeros(self.value_bound + 1) + 2
    }

    /// Bit bound for comparisons between plain integer objective values.
    fn small_bits(&self) -> u32 {
        64 - u64::leading_zeros(self.value_bound + 1) + 2
    }
}

/// One node of the search tree.
#[derive(Debug, Clone)]
pub struct Subproblem<F> {
    pub tableau: SharedTableau<F>,
    /// Parent relaxation value as a rational pair (numerator, denominator).
    pub bound_num: Sh<F>,
    pub bound_den: Sh<F>,
    /// 0/1 per structural variable: forced to one on this path.
    pub forced: Vec<Sh<F>>,
}

#[derive(Debug, Clone)]
pub struct BbOutcome<F> {
    /// 0/1 per structural variable.
    pub x_star: Vec<Sh<F>>,
    /// Incumbent value (plain integer in shares).
    pub z_star: Sh<F>,
    pub trace: TreeTrace,
}

/// Bound check: publish `[bound > incumbent]` (strict, by
/// cross-multiplication of the rational bound). `1` means explore.
pub fn prune_check<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    bound_num: Sh<F>,
    bound_den: Sh<F>,
    z_star: Sh<F>,
    params: &BbParams,
) -> Result<u64> {
    let scaled = mul_batch(ctx, &[z_star], &[bound_den])?[0];
    let bit = greater_than_batch(ctx, &[(bound_num, scaled)], params.value_bits())?[0];
    let t = ctx.open_u64(bit, OpenLabel::PruneBit).map_err(Error::Runtime)?;
    if t > 1 {
        return Err(Error::Runtime(crate::runtime::RuntimeError::Consistency(
            "prune bit out of range".into(),
        )));
    }
    Ok(t)
}

/// Incumbent update after solving a node.
///
/// Computes the fractionality flags `G_i = [X_i > 0][X_i < d]`, the unit
/// indicator of the first fractional variable, the floor `u = z/d` via the
/// comparison ladder against `k * d`, and replaces the incumbent by
/// `L_i = [X_i > 0]` with value `u` iff the solution is integral and
/// strictly better. Returns the new incumbent, the branch indicator and the
/// shared fractionality bit.
pub struct UpdateOutcome<F> {
    pub x_star: Vec<Sh<F>>,
    pub z_star: Sh<F>,
    pub frac_indicator: Vec<Sh<F>>,
    pub frac_bit: Sh<F>,
    pub u: Sh<F>,
}

pub fn ip_update<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    x_complete: &[Sh<F>],
    z: Sh<F>,
    denom: Sh<F>,
    x_star: &[Sh<F>],
    z_star: Sh<F>,
    params: &BbParams,
) -> Result<UpdateOutcome<F>> {
    let n = x_complete.len();
    let entry_bits = params.simplex.entry_bits;
    let one = F::one();

    // [X_i > 0] and [X_i < d] in one comparison batch
    let mut operands: Vec<Sh<F>> = x_complete.to_vec();
    for &x in x_complete {
        operands.push(denom - x);
    }
    let bits = gtz_batch(ctx, &operands, entry_bits)?;
    let (pos, below) = bits.split_at(n);
    let g = mul_batch(ctx, pos, below)?;
    let frac_indicator = first_one_indicator(ctx, &g)?;
    let frac_bit = frac_indicator
        .iter()
        .fold(Sh(F::zero()), |a, &b| a + b);

    // floor(z / d) by the ladder z >= k*d, valid because z <= bound * d
    let ladder: Vec<Sh<F>> = (1..=params.value_bound)
        .map(|k| z - denom * F::from_u64(k) + one)
        .collect();
    let ladder_bits = gtz_batch(ctx, &ladder, params.value_bits())?;
    let u = ladder_bits.iter().fold(Sh(F::zero()), |a, &b| a + b);

    let improve = greater_than_batch(ctx, &[(u, z_star)], params.small_bits())?[0];
    let integral = Sh(one) - frac_bit;
    let cond = mul_batch(ctx, &[integral], &[improve])?[0];

    // select the new incumbent
    let mut sel_bits = vec![cond; n + 1];
    let mut xs: Vec<Sh<F>> = pos.to_vec();
    xs.push(u);
    let mut ys: Vec<Sh<F>> = x_star.to_vec();
    ys.push(z_star);
    sel_bits.truncate(xs.len());
    let selected = cond_select_batch(ctx, &sel_bits, &xs, &ys)?;
    let (new_x, new_z) = selected.split_at(n);

    Ok(UpdateOutcome {
        x_star: new_x.to_vec(),
        z_star: new_z[0],
        frac_indicator,
        frac_bit,
        u,
    })
}

/// Create the two child tableaus for branch values 0 and 1: the column
/// picked by the unit indicator is zeroed obliviously and, for the
/// 1-child, absorbed into the bound column (objective cell included).
/// A zero indicator returns two untouched copies.
pub fn ip_branch<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    t: &SharedTableau<F>,
    frac_indicator: &[Sh<F>],
) -> Result<(SharedTableau<F>, SharedTableau<F>)> {
    assert_eq!(frac_indicator.len(), t.n_struct);
    let rows = t.m + 1;
    // branch column D = T * F over structural columns
    let mut lhs = Vec::with_capacity(rows * t.n_struct);
    let mut rhs = Vec::with_capacity(rows * t.n_struct);
    for row in &t.rows {
        for j in 0..t.n_struct {
            lhs.push(row[j]);
            rhs.push(frac_indicator[j]);
        }
    }
    let prods = mul_batch(ctx, &lhs, &rhs)?;
    let d_col: Vec<Sh<F>> = prods
        .chunks(t.n_struct)
        .map(|c| c.iter().fold(Sh(F::zero()), |a, &b| a + b))
        .collect();
    // outer product D x F zeroes the column in both children
    let mut ol = Vec::with_capacity(rows * t.n_struct);
    let mut or = Vec::with_capacity(rows * t.n_struct);
    for k in 0..rows {
        for j in 0..t.n_struct {
            ol.push(d_col[k]);
            or.push(frac_indicator[j]);
        }
    }
    let outer = mul_batch(ctx, &ol, &or)?;

    let bc = t.bound_col();
    let mut child0 = t.clone();
    let mut child1 = t.clone();
    for k in 0..rows {
        for j in 0..t.n_struct {
            let delta = outer[k * t.n_struct + j];
            child0.rows[k][j] = child0.rows[k][j] - delta;
            child1.rows[k][j] = child1.rows[k][j] - delta;
        }
        // only the 1-child moves the column into the bounds
        child1.rows[k][bc] = child1.rows[k][bc] - d_col[k];
    }
    Ok((child0, child1))
}

/// Run branch-and-bound on a shared tableau. FIFO subproblem list; the
/// 1-child is enqueued before the 0-child. Opens one prune bit per node,
/// one branch bit per explored node and the simplex termination bits —
/// nothing else.
pub fn pp_branch_and_bound<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    t0: &SharedTableau<F>,
    params: &BbParams,
) -> Result<BbOutcome<F>> {
    let n_struct = t0.n_struct;
    let mut x_star = vec![Sh(F::zero()); n_struct];
    let mut z_star = Sh(F::zero());
    let mut trace = TreeTrace::default();
    let mut queue: VecDeque<(Subproblem<F>, Option<usize>, Option<u8>)> = VecDeque::new();
    queue.push_back((
        Subproblem {
            tableau: t0.clone(),
            bound_num: Sh::constant_u64(params.value_bound),
            bound_den: Sh(F::one()),
            forced: vec![Sh(F::zero()); n_struct],
        },
        None,
        None,
    ));

    while let Some((node, parent, branch_value)) = queue.pop_front() {
        let id = trace.add_node(parent, branch_value);
        let explore = prune_check(ctx, node.bound_num, node.bound_den, z_star, params)?;
        if explore == 0 {
            trace.mark_pruned(id);
            continue;
        }
        let lp = pp_simplex(ctx, &node.tableau, &params.simplex)?;
        trace.set_iterations(id, lp.iterations);

        // complete solution: forced variables come back at full scale
        let denoms = vec![lp.denom; n_struct];
        let scaled_forced = mul_batch(ctx, &denoms, &node.forced)?;
        let x_complete: Vec<Sh<F>> = (0..n_struct)
            .map(|i| lp.x_scaled[i] + scaled_forced[i])
            .collect();

        let upd = ip_update(ctx, &x_complete, lp.z, lp.denom, &x_star, z_star, params)?;
        x_star = upd.x_star;
        z_star = upd.z_star;

        let fractional = ctx
            .open_u64(upd.frac_bit, OpenLabel::PruneBit)
            .map_err(Error::Runtime)?;
        if fractional > 1 {
            return Err(Error::Runtime(crate::runtime::RuntimeError::Consistency(
                "branch bit out of range".into(),
            )));
        }
        if fractional == 1 {
            let (child0, child1) = ip_branch(ctx, &node.tableau, &upd.frac_indicator)?;
            let mut forced1 = node.forced.clone();
            for (f, ind) in forced1.iter_mut().zip(&upd.frac_indicator) {
                *f = *f + *ind;
            }
            queue.push_back((
                Subproblem {
                    tableau: child1,
                    bound_num: lp.z,
                    bound_den: lp.denom,
                    forced: forced1,
                },
                Some(id),
                Some(1),
            ));
            queue.push_back((
                Subproblem {
                    tableau: child0,
                    bound_num: lp.z,
                    bound_den: lp.denom,
                    forced: node.forced,
                },
                Some(id),
                Some(0),
            ));
        }
    }

    Ok(BbOutcome {
        x_star,
        z_star,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::F127;
    use crate::plain::{demo_ip_tableau, plain_branch_and_bound, PlainTableau};
    use crate::runtime::{run_session, SessionConfig, Transcript};
    use crate::shamir::{SecretShare, Shamir};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn params(value_bound: u64) -> BbParams {
        BbParams::new(value_bound, SimplexParams::new(24, 64))
    }

    fn reconstruct(outputs: &[Vec<Sh<F127>>]) -> Vec<i128> {
        let shamir = Shamir::<F127>::new(3, 1).unwrap();
        (0..outputs[0].len())
            .map(|k| {
                let pts: Vec<SecretShare<F127>> = outputs
                    .iter()
                    .enumerate()
                    .map(|(p, o)| SecretShare { party: p, point: o[k].0 })
                    .collect();
                shamir.reconstruct_i128(&pts).unwrap()
            })
            .collect()
    }

    fn run_bb(
        plain: &PlainTableau,
        value_bound: u64,
        seed: u64,
    ) -> (Vec<i128>, i128, TreeTrace, Transcript) {
        let cfg = SessionConfig::default().with_seed(seed);
        let shamir = Shamir::<F127>::new(cfg.kappa, cfg.threshold).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0xBB);
        let tableaus = SharedTableau::deal(plain, &shamir, &mut rng);
        let out = run_session(&cfg, tableaus, |ctx, tab| {
            let r = pp_branch_and_bound(ctx, &tab, &params(value_bound))?;
            let mut shares = r.x_star.clone();
            shares.push(r.z_star);
            Ok((shares, r.trace))
        })
        .unwrap();
        let shares: Vec<Vec<Sh<F127>>> = out.outputs.iter().map(|o| o.0.clone()).collect();
        let vals = reconstruct(&shares);
        let (x, z) = vals.split_at(plain.n_struct);
        let trace = out.outputs[0].1.clone();
        (x.to_vec(), z[0], trace, out.transcript)
    }

    #[test]
    fn demo_ip_matches_figure_tree() {
        let plain = demo_ip_tableau();
        let expect = plain_branch_and_bound(&plain, 4, 64).unwrap();
        let (x, z, trace, transcript) = run_bb(&plain, 4, 5);
        assert_eq!(x, vec![1, 0, 0]);
        assert_eq!(z, 3);
        assert_eq!(trace, expect.trace);
        assert_eq!(trace.node_count(), 5);
        assert_eq!(trace.pruned_ids(), vec![4, 5]);
        // opened prune bits spell the plaintext control sequence
        let bits = transcript.values_with_label(crate::runtime::OpenLabel::PruneBit);
        let expect_bits: Vec<u64> =
            expect.trace.control_bits().iter().map(|&b| b as u64).collect();
        assert_eq!(bits, expect_bits);
        assert_eq!(bits, vec![1, 1, 1, 0, 1, 1, 0, 0]);
        // termination bits count: one per optimality check
        let term = transcript
            .values_with_label(crate::runtime::OpenLabel::SimplexTerminationBit)
            .len();
        assert_eq!(term, expect.trace.total_simplex_iterations() + 3);
        // no other labels
        assert_eq!(
            transcript.labels().len(),
            2,
            "only prune and termination bits may be opened"
        );
    }

    #[test]
    fn random_small_instances_match_plain() {
        let mut rng = ChaCha12Rng::seed_from_u64(1234);
        for case in 0..8 {
            let n = rng.gen_range(1..4usize);
            let m = rng.gen_range(1..4usize);
            let c: Vec<i128> = (0..n).map(|_| rng.gen_range(0..4)).collect();
            let mut a: Vec<Vec<i128>> = (0..m)
                .map(|_| (0..n).map(|_| rng.gen_range(0..2)).collect())
                .collect();
            for j in 0..n {
                if a.iter().all(|row| row[j] == 0) {
                    a[0][j] = 1;
                }
            }
            let b: Vec<i128> = (0..m).map(|_| 1).collect();
            let plain = PlainTableau::from_inequalities(&c, &a, &b).unwrap();
            let bound = c.iter().sum::<i128>().max(1) as u64;
            let expect = plain_branch_and_bound(&plain, bound, 64).unwrap();
            let (x, z, trace, _) = run_bb(&plain, bound, 900 + case);
            assert_eq!(z, expect.z_star, "case {case}");
            assert_eq!(x, expect.x_star, "case {case}");
            assert_eq!(trace, expect.trace, "case {case}");
        }
    }

    #[test]
    fn prune_check_cases() {
        // bound 18/7 against incumbent 3 prunes; 7/2 explores; equality prunes
        let cfg = SessionConfig::default().with_seed(9);
        let cases = [(18i128, 7i128, 3i128, 0u64), (7, 2, 3, 1), (3, 1, 3, 0)];
        let shamir = Shamir::<F127>::new(3, 1).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let mut inputs: Vec<Vec<Sh<F127>>> = vec![Vec::new(); 3];
        for &(num, den, zs, _) in &cases {
            for v in [num, den, zs] {
                for (p, s) in shamir.share_i128(v, &mut rng).unwrap().into_iter().enumerate() {
                    inputs[p].push(Sh(s));
                }
            }
        }
        let out = run_session(&cfg, inputs, |ctx, sh| {
            let mut got = Vec::new();
            for c in sh.chunks(3) {
                got.push(prune_check(ctx, c[0], c[1], c[2], &params(4))?);
            }
            Ok(got)
        })
        .unwrap();
        for o in &out.outputs {
            assert_eq!(*o, cases.iter().map(|c| c.3).collect::<Vec<_>>());
        }
    }

    #[test]
    fn ip_update_cases() {
        let cfg = SessionConfig::default().with_seed(10).with_test_hooks();
        let shamir = Shamir::<F127>::new(3, 1).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        // pack (x3, z, d, x*3, z*) triples for three scenarios
        let scenarios: Vec<(Vec<i128>, i128, i128, Vec<i128>, i128)> = vec![
            (vec![1, 1, 1], 7, 2, vec![0, 0, 0], 0), // fractional root
            (vec![1, 0, 0], 3, 1, vec![0, 0, 0], 0), // integral improvement
            (vec![0, 0, 0], 0, 1, vec![0, 0, 0], 0), // no strict improvement
        ];
        let mut inputs: Vec<Vec<Sh<F127>>> = vec![Vec::new(); 3];
        for (x, z, d, xs, zs) in &scenarios {
            let mut flat: Vec<i128> = x.clone();
            flat.push(*z);
            flat.push(*d);
            flat.extend(xs);
            flat.push(*zs);
            for v in flat {
                for (p, s) in shamir.share_i128(v, &mut rng).unwrap().into_iter().enumerate() {
                    inputs[p].push(Sh(s));
                }
            }
        }
        let out = run_session(&cfg, inputs, |ctx, sh| {
            let mut all = Vec::new();
            for c in sh.chunks(9) {
                let upd = ip_update(ctx, &c[..3], c[3], c[4], &c[5..8], c[8], &params(4))?;
                let mut open = upd.frac_indicator.clone();
                open.push(upd.frac_bit);
                open.push(upd.u);
                open.extend(upd.x_star);
                open.push(upd.z_star);
                let vals = ctx.test_open_batch(&open).map_err(crate::Error::Runtime)?;
                all.push(vals.iter().map(|v| v.to_i128().unwrap()).collect::<Vec<_>>());
            }
            Ok(all)
        })
        .unwrap();
        let got = &out.outputs[0];
        // scenario 1: branch on the first variable, u = 3, incumbent kept
        assert_eq!(got[0], vec![1, 0, 0, 1, 3, 0, 0, 0, 0]);
        // scenario 2: integral, incumbent becomes (1,0,0) with value 3
        assert_eq!(got[1], vec![0, 0, 0, 0, 3, 1, 0, 0, 3]);
        // scenario 3: zero solution does not improve the zero incumbent
        assert_eq!(got[2], vec![0, 0, 0, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn ip_branch_cases() {
        let plain = demo_ip_tableau();
        let cfg = SessionConfig::default().with_seed(11).with_test_hooks();
        let shamir = Shamir::<F127>::new(3, 1).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let tableaus = SharedTableau::deal(&plain, &shamir, &mut rng);
        let out = run_session(&cfg, tableaus, |ctx, tab| {
            let e1 = {
                let mut v = vec![Sh(F127::zero()); 3];
                v[0] = Sh(F127::one());
                v
            };
            let (c0, c1) = ip_branch(ctx, &tab, &e1)?;
            let zero = vec![Sh(F127::zero()); 3];
            let (z0, z1) = ip_branch(ctx, &tab, &zero)?;
            let flat = |t: &SharedTableau<F127>| -> Vec<Sh<F127>> {
                t.rows.iter().flatten().copied().collect()
            };
            let mut opened = Vec::new();
            for t in [&c0, &c1, &z0, &z1] {
                opened.extend(
                    ctx.test_open_batch(&flat(t))
                        .map_err(crate::Error::Runtime)?
                        .iter()
                        .map(|v| v.to_i128().unwrap()),
                );
            }
            Ok(opened)
        })
        .unwrap();
        let got = &out.outputs[0];
        let width = plain.n() + 1;
        let rows = plain.m + 1;
        let chunk = width * rows;
        let as_rows = |offset: usize| -> Vec<Vec<i128>> {
            got[offset..offset + chunk]
                .chunks(width)
                .map(|r| r.to_vec())
                .collect()
        };
        let c0 = as_rows(0);
        let c1 = as_rows(chunk);
        let z0 = as_rows(2 * chunk);
        let z1 = as_rows(3 * chunk);
        // column of x1 zeroed in both children
        for r in 0..rows {
            assert_eq!(c0[r][0], 0);
            assert_eq!(c1[r][0], 0);
        }
        // 0-child: bounds unchanged; 1-child: substitution absorbed
        assert_eq!((c0[1][width - 1], c0[2][width - 1], c0[3][width - 1]), (3, 3, 3));
        assert_eq!((c1[1][width - 1], c1[2][width - 1], c1[3][width - 1]), (2, 0, 1));
        assert_eq!(c1[0][width - 1], -3); // objective cell absorbed 3 * x1
        // zero indicator: both children equal the input tableau
        for (r, row) in plain.rows.iter().enumerate() {
            assert_eq!(&z0[r], row);
            assert_eq!(&z1[r], row);
        }
    }
}
