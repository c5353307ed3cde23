//! From chosen subsets to concrete exchanges.
//!
//! The optimizer says which subsets are in the optimal packing; the cycle
//! map says which orientation realizes each. Expanding the selected cycles
//! into their edges gives the solution matrix `A`, a partial permutation
//! matrix over (shuffled) pair indices; after the reverse shuffle, summing
//! each row and column against the public index weights yields every
//! pair's recipient and donor.

use super::setup::CycleMapShares;
use super::subsets::SubsetEnumeration;
use crate::field::PrimeField;
use crate::primitives::mul_batch;
use crate::runtime::PeerCtx;
use crate::shamir::Sh;
use crate::Result;

/// `A(v, w) = 1` iff the edge `v -> w` belongs to a selected cycle:
/// `Y(i, j) = x*_i * map(i, j)` summed over the cycles containing the edge.
pub fn resolve_cycles<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    x_star: &[Sh<F>],
    map: &CycleMapShares<F>,
    enumeration: &SubsetEnumeration,
) -> Result<Vec<Vec<Sh<F>>>> {
    assert_eq!(x_star.len(), enumeration.len());
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for (i, row) in map.rows.iter().enumerate() {
        for &m in row {
            lhs.push(x_star[i]);
            rhs.push(m);
        }
    }
    let y = mul_batch(ctx, &lhs, &rhs)?;
    let n = enumeration.iota;
    let mut a = vec![vec![Sh(F::zero()); n]; n];
    let mut cursor = 0usize;
    for cycles in &enumeration.cycles {
        for cycle in cycles {
            let yij = y[cursor];
            cursor += 1;
            for (v, w) in SubsetEnumeration::cycle_edges(cycle) {
                a[v][w] = a[v][w] + yij;
            }
        }
    }
    Ok(a)
}

/// Recipient and donor index vectors from the solution matrix: row sums
/// weighted by 1-based column index give the recipient of each pair's
/// donor, column sums the donor serving each pair's patient; zero means no
/// exchange. Purely local.
pub fn derive_output<F: PrimeField>(a: &[Vec<Sh<F>>]) -> (Vec<Sh<F>>, Vec<Sh<F>>) {
    let n = a.len();
    let mut donor = vec![Sh(F::zero()); n];
    let mut recipient = vec![Sh(F::zero()); n];
    for i in 0..n {
        for j in 0..n {
            let w = F::from_u64(j as u64 + 1);
            recipient[i] = recipient[i] + a[i][j] * w;
        }
        for j in 0..n {
            let w = F::from_u64(j as u64 + 1);
            donor[i] = donor[i] + a[j][i] * w;
        }
    }
    (donor, recipient)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plaintext counterpart used across tests: expand selected cycles.
    pub(crate) fn plain_resolve(
        x_star: &[i128],
        chosen: &[Option<usize>],
        enumeration: &SubsetEnumeration,
    ) -> Vec<Vec<i128>> {
        let n = enumeration.iota;
        let mut a = vec![vec![0i128; n]; n];
        for (i, cycles) in enumeration.cycles.iter().enumerate() {
            if x_star[i] == 1 {
                if let Some(j) = chosen[i] {
                    for (v, w) in SubsetEnumeration::cycle_edges(&cycles[j]) {
                        a[v][w] += 1;
                    }
                }
            }
        }
        a
    }

    #[test]
    fn three_cycle_expands_to_edges() {
        let e = SubsetEnumeration::new(4, 3).unwrap();
        let idx = e.subsets.iter().position(|s| s == &vec![0, 1, 3]).unwrap();
        let mut x = vec![0i128; e.len()];
        x[idx] = 1;
        let mut chosen = vec![None; e.len()];
        chosen[idx] = Some(0); // orientation (0, 1, 3)
        let a = plain_resolve(&x, &chosen, &e);
        let mut expect = vec![vec![0i128; 4]; 4];
        expect[0][1] = 1;
        expect[1][3] = 1;
        expect[3][0] = 1;
        assert_eq!(a, expect);
        // row/column sums are 0 or 1
        for i in 0..4 {
            assert!(a[i].iter().sum::<i128>() <= 1);
            assert!((0..4).map(|r| a[r][i]).sum::<i128>() <= 1);
        }
    }

    #[test]
    fn empty_selection_gives_zero_matrix() {
        let e = SubsetEnumeration::new(3, 2).unwrap();
        let a = plain_resolve(&vec![0; e.len()], &vec![None; e.len()], &e);
        assert!(a.iter().flatten().all(|&v| v == 0));
    }

    #[test]
    fn derive_output_on_plain_matrix() {
        // shared-arithmetic derive_output on constant shares equals the
        // hand-computed indices for the worked 3-cycle
        use crate::field::F127;
        let mut a = vec![vec![Sh(F127::zero()); 4]; 4];
        a[0][1] = Sh(F127::one());
        a[1][3] = Sh(F127::one());
        a[3][0] = Sh(F127::one());
        let (d, r) = derive_output(&a);
        let to_vals = |v: Vec<Sh<F127>>| -> Vec<i128> {
            v.iter().map(|s| s.0.to_i128().unwrap()).collect()
        };
        assert_eq!(to_vals(r), vec![2, 4, 0, 1]);
        assert_eq!(to_vals(d), vec![4, 1, 0, 2]);
    }
}
