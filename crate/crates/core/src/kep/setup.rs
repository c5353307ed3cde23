//! Initial-tableau construction from the shared adjacency matrix.
//!
//! The constraint block is public: subset-membership incidence rows, an
//! identity slack block, and a bound column of ones. Only the objective
//! row is data-dependent: subset `i` earns coefficient `|S_i|` iff some
//! cycle through exactly its vertices exists in the hidden graph. Cycle
//! existence is one comparison on the cycle's edge-indicator sum, and the
//! first existing orientation per subset is selected to form the
//! subset-to-cycle map used later to resolve concrete exchanges.

use super::subsets::SubsetEnumeration;
use crate::field::PrimeField;
use crate::ppsimplex::SharedTableau;
use crate::primitives::{first_one_indicator, gtz_batch, prefix_or_segmented};
use crate::runtime::PeerCtx;
use crate::shamir::Sh;
use crate::Result;

/// Shared subset-to-cycle selection: `rows[i][j] = 1` iff cycle `j` of
/// subset `i` exists in the graph and no earlier orientation does.
#[derive(Debug, Clone)]
pub struct CycleMapShares<F> {
    pub rows: Vec<Vec<Sh<F>>>,
}

/// Build the shared initial tableau and the cycle map.
pub fn ip_setup<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    adjacency: &[Vec<Sh<F>>],
    enumeration: &SubsetEnumeration,
) -> Result<(SharedTableau<F>, CycleMapShares<F>)> {
    let iota = enumeration.iota;
    assert_eq!(adjacency.len(), iota);
    let n_subsets = enumeration.len();

    // edge-indicator sum per candidate cycle, then one comparison each:
    // a cycle of size k exists iff its k edges sum to k
    let mut sums = Vec::new();
    for (i, cycles) in enumeration.cycles.iter().enumerate() {
        let size = enumeration.subsets[i].len() as i128;
        for cycle in cycles {
            let mut acc = Sh(F::zero());
            for (v, w) in SubsetEnumeration::cycle_edges(cycle) {
                acc = acc + adjacency[v][w];
            }
            // sum - (k - 1) > 0  <=>  sum >= k
            sums.push(acc - F::from_i128(size - 1));
        }
    }
    let sum_bits = (usize::BITS - enumeration.max_cycle.leading_zeros()) + 2;
    let exists = gtz_batch(ctx, &sums, sum_bits)?;

    // first existing orientation per subset
    let mut segments: Vec<Vec<Sh<F>>> = Vec::with_capacity(n_subsets);
    let mut cursor = 0usize;
    for cycles in &enumeration.cycles {
        segments.push(exists[cursor..cursor + cycles.len()].to_vec());
        cursor += cycles.len();
    }
    let prefixes = prefix_or_segmented(ctx, &segments)?;
    let mut rows = Vec::with_capacity(n_subsets);
    let mut subset_exists = Vec::with_capacity(n_subsets);
    for p in prefixes {
        let mut row = Vec::with_capacity(p.len());
        row.push(p[0]);
        for j in 1..p.len() {
            row.push(p[j] - p[j - 1]);
        }
        subset_exists.push(*p.last().expect("at least one orientation"));
        rows.push(row);
    }

    // objective row: |S_i| when a cycle exists, 0 otherwise; the rest of
    // the tableau is public structure
    let n = n_subsets + iota;
    let width = n + 1;
    let mut tab_rows: Vec<Vec<Sh<F>>> = Vec::with_capacity(iota + 1);
    let mut objective = vec![Sh(F::zero()); width];
    for (i, exists) in subset_exists.iter().enumerate() {
        objective[i] = *exists * F::from_u64(enumeration.subsets[i].len() as u64);
    }
    tab_rows.push(objective);
    let incidence = enumeration.incidence();
    for v in 0..iota {
        let mut row = vec![Sh(F::zero()); width];
        for (i, &bit) in incidence[v].iter().enumerate() {
            if bit == 1 {
                row[i] = Sh(F::one());
            }
        }
        row[n_subsets + v] = Sh(F::one());
        row[width - 1] = Sh(F::one());
        tab_rows.push(row);
    }

    Ok((
        SharedTableau {
            m: iota,
            n_struct: n_subsets,
            n_slack: iota,
            rows: tab_rows,
        },
        CycleMapShares { rows },
    ))
}

/// Plaintext mirror of [`ip_setup`]'s objective/cycle-map logic, used by
/// oracle tests: returns the tableau and the selected cycle per subset.
pub fn plain_setup(
    adjacency: &[Vec<u8>],
    enumeration: &SubsetEnumeration,
) -> (crate::plain::PlainTableau, Vec<Option<usize>>) {
    let iota = enumeration.iota;
    let n_subsets = enumeration.len();
    let mut chosen = Vec::with_capacity(n_subsets);
    let mut c = vec![0i128; n_subsets];
    for (i, cycles) in enumeration.cycles.iter().enumerate() {
        let mut pick = None;
        for (j, cycle) in cycles.iter().enumerate() {
            let all = SubsetEnumeration::cycle_edges(cycle)
                .iter()
                .all(|&(v, w)| adjacency[v][w] == 1);
            if all {
                pick = Some(j);
                break;
            }
        }
        if pick.is_some() {
            c[i] = enumeration.subsets[i].len() as i128;
        }
        chosen.push(pick);
    }
    let incidence = enumeration.incidence();
    let a: Vec<Vec<i128>> = (0..iota)
        .map(|v| incidence[v].iter().map(|&b| b as i128).collect())
        .collect();
    let b = vec![1i128; iota];
    let tableau = crate::plain::PlainTableau::from_inequalities(&c, &a, &b)
        .expect("static dimensions");
    (tableau, chosen)
}

/// `first_one_indicator` re-exported for symmetry with the shared path.
pub use first_one_indicator as _first_one;
