//! Plaintext branch-and-bound over the exact simplex.
//!
//! This is the reference for the secret-shared protocol and mirrors it
//! decision for decision: FIFO subproblem list, the 1-child enqueued before
//! the 0-child, bound checks by cross-multiplication against the incumbent,
//! the floor bound computed by comparisons against multiples of the
//! denominator, and branching only when the relaxation came out fractional
//! (children of an integral node would be cut at the bound check anyway,
//! and not creating them keeps the published tree equal to this trace).

use super::simplex::{exact_simplex, PlainLpResult};
use super::tableau::PlainTableau;
use crate::trace::TreeTrace;
use crate::{Error, Result};
use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub struct PlainBbResult {
    /// 0/1 per structural variable.
    pub x_star: Vec<i128>,
    /// Objective value of the incumbent (a plain integer).
    pub z_star: i128,
    pub trace: TreeTrace,
    /// Diagnostic: each evaluated node's bound as a rational pair.
    pub bounds: Vec<(i128, i128)>,
}

struct Node {
    tableau: PlainTableau,
    bound_num: i128,
    bound_den: i128,
    forced: Vec<i128>,
    parent: Option<usize>,
    branch_value: Option<u8>,
}

/// Floor of `z / d` computed the way the shared protocol does: counting the
/// multiples `k * d <= z` for `k = 1..=value_bound`.
fn floor_by_comparisons(z: i128, d: i128, value_bound: u64) -> i128 {
    let mut u = 0i128;
    for k in 1..=value_bound as i128 {
        if z >= k * d {
            u += 1;
        }
    }
    debug_assert_eq!(u, z.div_euclid(d).clamp(0, value_bound as i128));
    u
}

/// Solve a 0/1 program of subset-formulation shape to optimality.
///
/// `value_bound` is a public integer upper bound on the objective (the pool
/// size for exchange instances); it seeds the root bound and sizes the
/// comparison ladder for floor computations.
pub fn plain_branch_and_bound(
    t0: &PlainTableau,
    value_bound: u64,
    iter_cap: usize,
) -> Result<PlainBbResult> {
    let n_struct = t0.n_struct;
    let mut x_star = vec![0i128; n_struct];
    let mut z_star: i128 = 0;
    let mut trace = TreeTrace::default();
    let mut bounds = Vec::new();
    let mut queue: VecDeque<Node> = VecDeque::new();
    queue.push_back(Node {
        tableau: t0.clone(),
        bound_num: value_bound as i128,
        bound_den: 1,
        forced: vec![0i128; n_struct],
        parent: None,
        branch_value: None,
    });

    while let Some(node) = queue.pop_front() {
        let id = trace.add_node(node.parent, node.branch_value);
        bounds.push((node.bound_num, node.bound_den));
        // explore iff bound/denominator > incumbent, strictly
        let explore = node.bound_num > z_star
            .checked_mul(node.bound_den)
            .ok_or(Error::Overflow)?;
        if !explore {
            trace.mark_pruned(id);
            continue;
        }
        let lp: PlainLpResult = exact_simplex(&node.tableau, iter_cap)?;
        trace.set_iterations(id, lp.iterations);
        let d = lp.denom;
        // complete solution: the simplex ran with forced variables
        // substituted out, so add them back at full scale
        let complete: Vec<i128> = (0..n_struct)
            .map(|i| lp.x_scaled[i] + d * node.forced[i])
            .collect();
        debug_assert!(complete.iter().all(|&x| x >= 0 && x <= d));
        let first_frac = complete.iter().position(|&x| x > 0 && x < d);
        let u = floor_by_comparisons(lp.z, d, value_bound);
        if first_frac.is_none() && u > z_star {
            z_star = u;
            x_star = complete.iter().map(|&x| i128::from(x > 0)).collect();
        }
        if let Some(frac) = first_frac {
            for v in [1u8, 0] {
                let child = node.tableau.substitute(frac, v as i128);
                let mut forced = node.forced.clone();
                if v == 1 {
                    forced[frac] = 1;
                }
                queue.push_back(Node {
                    tableau: child,
                    bound_num: lp.z,
                    bound_den: d,
                    forced,
                    parent: Some(id),
                    branch_value: Some(v),
                });
            }
        }
    }

    Ok(PlainBbResult {
        x_star,
        z_star,
        trace,
        bounds,
    })
}
