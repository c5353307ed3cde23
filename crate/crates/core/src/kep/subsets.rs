//! Public enumeration of vertex subsets and their candidate cycles.
//!
//! The subset formulation keeps one variable per vertex set of size
//! `2..=max_cycle`; which cycle (if any) realizes a subset is
//! data-dependent and stays secret, but the enumeration itself is fixed
//! and public: subsets ordered by size then lexicographically, and within
//! a subset every directed cycle as a rotation starting at its smallest
//! vertex, ordered lexicographically. A subset of size `k` has `(k-1)!`
//! candidate cycles.

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct SubsetEnumeration {
    pub iota: usize,
    pub max_cycle: usize,
    /// Sorted vertex sets (0-based), size ascending then lexicographic.
    pub subsets: Vec<Vec<usize>>,
    /// Per subset: candidate cycles as vertex sequences.
    pub cycles: Vec<Vec<Vec<usize>>>,
}

impl SubsetEnumeration {
    pub fn new(iota: usize, max_cycle: usize) -> Result<Self> {
        if iota < 2 {
            return Err(Error::InvalidInput("need at least two pairs".into()));
        }
        if max_cycle < 2 {
            return Err(Error::InvalidInput("maximum cycle size must be >= 2".into()));
        }
        let mut subsets = Vec::new();
        for size in 2..=max_cycle.min(iota) {
            let mut cur = Vec::with_capacity(size);
            combos(0, iota, size, &mut cur, &mut subsets);
        }
        let cycles = subsets
            .iter()
            .map(|s| {
                let mut perms = Vec::new();
                let mut rest: Vec<usize> = s[1..].to_vec();
                permutations(&mut rest, 0, &mut |perm| {
                    let mut cycle = Vec::with_capacity(s.len());
                    cycle.push(s[0]);
                    cycle.extend_from_slice(perm);
                    perms.push(cycle);
                });
                perms
            })
            .collect();
        Ok(SubsetEnumeration {
            iota,
            max_cycle,
            subsets,
            cycles,
        })
    }

    /// Number of subset variables.
    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    /// Directed edges of a cycle given as a vertex sequence.
    pub fn cycle_edges(cycle: &[usize]) -> Vec<(usize, usize)> {
        let mut edges = Vec::with_capacity(cycle.len());
        for w in cycle.windows(2) {
            edges.push((w[0], w[1]));
        }
        edges.push((cycle[cycle.len() - 1], cycle[0]));
        edges
    }

    /// Membership incidence: `row[v][i] = 1` iff vertex `v` is in subset `i`.
    pub fn incidence(&self) -> Vec<Vec<u8>> {
        let mut rows = vec![vec![0u8; self.len()]; self.iota];
        for (i, s) in self.subsets.iter().enumerate() {
            for &v in s {
                rows[v][i] = 1;
            }
        }
        rows
    }

    pub fn max_cycles_per_subset(&self) -> usize {
        self.cycles.iter().map(Vec::len).max().unwrap_or(0)
    }
}

fn combos(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == size {
        out.push(cur.clone());
        return;
    }
    for v in start..n {
        cur.push(v);
        combos(v + 1, n, size, cur, out);
        cur.pop();
    }
}

/// Lexicographic permutations by recursive selection sort of the suffix.
fn permutations(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    let suffix: Vec<usize> = items[k..].to_vec();
    let mut sorted = suffix.clone();
    sorted.sort_unstable();
    for &pick in &sorted {
        let pos = items[k..].iter().position(|&x| x == pick).unwrap() + k;
        items[k..=pos].rotate_right(1);
        permutations(items, k + 1, visit);
        items[k..=pos].rotate_left(1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_node_enumeration_matches_variable_order() {
        let e = SubsetEnumeration::new(4, 3).unwrap();
        let expected: Vec<Vec<usize>> = vec![
            vec![0, 1],
            vec![0, 2],
            vec![0, 3],
            vec![1, 2],
            vec![1, 3],
            vec![2, 3],
            vec![0, 1, 2],
            vec![0, 1, 3],
            vec![0, 2, 3],
            vec![1, 2, 3],
        ];
        assert_eq!(e.subsets, expected);
        assert_eq!(e.len(), 10);
    }

    #[test]
    fn subset_count_is_binomial_sum() {
        for iota in 2..9 {
            for ell in 2..4 {
                let e = SubsetEnumeration::new(iota, ell).unwrap();
                let choose = |n: usize, k: usize| -> usize {
                    if k > n {
                        return 0;
                    }
                    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
                };
                let expect: usize = (2..=ell.min(iota)).map(|k| choose(iota, k)).sum();
                assert_eq!(e.len(), expect, "iota={iota} ell={ell}");
            }
        }
    }

    #[test]
    fn cycle_orientations_ordered() {
        let e = SubsetEnumeration::new(4, 3).unwrap();
        // subset {0,1,3}: rotations starting at 0, lexicographic
        let idx = e.subsets.iter().position(|s| s == &vec![0, 1, 3]).unwrap();
        assert_eq!(e.cycles[idx], vec![vec![0, 1, 3], vec![0, 3, 1]]);
        // a pair has a single 2-cycle
        assert_eq!(e.cycles[0], vec![vec![0, 1]]);
        // factorial counts
        for (s, cs) in e.subsets.iter().zip(&e.cycles) {
            let fact: usize = (1..s.len()).product();
            assert_eq!(cs.len(), fact);
        }
    }

    #[test]
    fn cycle_edges_wrap() {
        assert_eq!(
            SubsetEnumeration::cycle_edges(&[0, 1, 3]),
            vec![(0, 1), (1, 3), (3, 0)]
        );
        assert_eq!(SubsetEnumeration::cycle_edges(&[2, 5]), vec![(2, 5), (5, 2)]);
    }
}
