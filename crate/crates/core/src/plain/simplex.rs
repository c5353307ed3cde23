//! Exact integer-pivoting simplex (fraction-free).
//!
//! Pivot column: smallest index with a positive objective entry (Bland's
//! rule). Pivot row: cross-multiplied ratio test over rows with a positive
//! pivot-column entry, smallest index on ties. The update keeps the pivot
//! row and replaces every other entry by
//! `(pivot * entry - col_entry * pivot_row_entry) / previous_pivot`,
//! which divides exactly; the running pivot is the common denominator `d`,
//! so the solution is `x_scaled / d` with value `z / d`.
//!
//! This solver is both the test oracle for the secret-shared simplex and a
//! step-for-step mirror of it: identical pivot rules give identical
//! iteration counts, which is what makes trace equality checkable.

use super::tableau::PlainTableau;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlainLpResult {
    /// Scaled solution over all variables (structural then slack).
    pub x_scaled: Vec<i128>,
    /// Scaled objective value (true value is `z / denom`).
    pub z: i128,
    /// Common denominator: the final pivot (1 when no pivot happened).
    pub denom: i128,
    pub iterations: usize,
}

fn cmul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

/// Choose the pivot row for `col`: smallest ratio `b_i / T(i, col)` over
/// rows with positive column entry, ties to the smaller index.
pub fn ratio_test(t: &PlainTableau, col: usize) -> Result<Option<usize>> {
    let bc = t.bound_col();
    let mut best: Option<usize> = None;
    for i in 1..=t.m {
        let den = t.rows[i][col];
        if den <= 0 {
            continue;
        }
        match best {
            None => best = Some(i),
            Some(r) => {
                // b_i / den < b_r / den_r  <=>  b_i * den_r < b_r * den
                let lhs = cmul(t.rows[i][bc], t.rows[r][col])?;
                let rhs = cmul(t.rows[r][bc], t.rows[i][col])?;
                if lhs < rhs {
                    best = Some(i);
                }
            }
        }
    }
    Ok(best)
}

/// Fraction-free pivot at `(row, col)`; `prev` is the previous pivot value.
/// Returns the new pivot (the new common denominator).
pub fn pivot_update(t: &mut PlainTableau, row: usize, col: usize, prev: i128) -> Result<i128> {
    let pivot = t.rows[row][col];
    debug_assert!(pivot > 0, "pivot must be positive");
    let pivot_row = t.rows[row].clone();
    for (i, r) in t.rows.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let factor = r[col];
        for (j, cell) in r.iter_mut().enumerate() {
            let num = cmul(pivot, *cell)?.checked_sub(cmul(factor, pivot_row[j])?)
                .ok_or(Error::Overflow)?;
            debug_assert_eq!(num % prev, 0, "fraction-free division must be exact");
            *cell = num / prev;
        }
    }
    Ok(pivot)
}

/// Run integer-pivoting simplex to optimality.
///
/// Requires a feasible all-slack start (`b >= 0`); errors with
/// [`Error::Unbounded`] when a pivot column has no positive entry and with
/// [`Error::IterationCap`] when `cap` is exceeded.
pub fn exact_simplex(t: &PlainTableau, cap: usize) -> Result<PlainLpResult> {
    let bc = t.bound_col();
    if t.rows[1..].iter().any(|r| r[bc] < 0) {
        return Err(Error::InfeasibleStart);
    }
    let mut work = t.clone();
    let mut denom: i128 = 1;
    let mut basis: Vec<usize> = (0..t.m).map(|i| t.n_struct + i).collect();
    let mut iterations = 0usize;
    loop {
        let col = (0..work.n()).find(|&j| work.rows[0][j] > 0);
        let Some(col) = col else { break };
        if iterations >= cap {
            return Err(Error::IterationCap(cap));
        }
        let row = ratio_test(&work, col)?.ok_or(Error::Unbounded)?;
        denom = pivot_update(&mut work, row, col, denom)?;
        basis[row - 1] = col;
        iterations += 1;
    }
    let mut x_scaled = vec![0i128; work.n()];
    for (i, &var) in basis.iter().enumerate() {
        x_scaled[var] = work.rows[i + 1][bc];
    }
    Ok(PlainLpResult {
        x_scaled,
        z: -work.rows[0][bc],
        denom,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{Signed, Zero};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    pub(crate) fn eq5_tableau() -> PlainTableau {
        PlainTableau::from_inequalities(
            &[3, 2, 2],
            &[vec![1, 2, 3], vec![3, 1, 2], vec![2, 3, 1]],
            &[3, 3, 3],
        )
        .unwrap()
    }

    /// Classical simplex over exact rationals with the same pivot rules;
    /// the independent shadow for the fraction-free solver.
    fn rational_simplex(t: &PlainTableau) -> (Vec<BigRational>, BigRational, usize) {
        let big = |v: i128| BigRational::from(BigInt::from(v));
        let mut rows: Vec<Vec<BigRational>> = t
            .rows
            .iter()
            .map(|r| r.iter().map(|&v| big(v)).collect())
            .collect();
        let bc = t.bound_col();
        let mut basis: Vec<usize> = (0..t.m).map(|i| t.n_struct + i).collect();
        let mut iters = 0;
        loop {
            let Some(col) = (0..t.n()).find(|&j| rows[0][j].is_positive()) else {
                break;
            };
            let mut best: Option<usize> = None;
            for i in 1..=t.m {
                if rows[i][col].is_positive() {
                    let ratio = &rows[i][bc] / &rows[i][col];
                    match best {
                        None => best = Some(i),
                        Some(r) => {
                            if ratio < &rows[r][bc] / &rows[r][col] {
                                best = Some(i);
                            }
                        }
                    }
                }
            }
            let row = best.expect("bounded test instances");
            let pivot = rows[row][col].clone();
            for j in 0..=bc {
                rows[row][j] = &rows[row][j] / &pivot;
            }
            for i in 0..=t.m {
                if i != row && !rows[i][col].is_zero() {
                    let f = rows[i][col].clone();
                    for j in 0..=bc {
                        let sub = &f * &rows[row][j];
                        rows[i][j] = &rows[i][j] - sub;
                    }
                }
            }
            basis[row - 1] = col;
            iters += 1;
        }
        let mut x = vec![BigRational::zero(); t.n()];
        for (i, &var) in basis.iter().enumerate() {
            x[var] = rows[i + 1][bc].clone();
        }
        (x, -rows[0][bc].clone(), iters)
    }

    #[test]
    fn eq5_root_relaxation() {
        let r = exact_simplex(&eq5_tableau(), 64).unwrap();
        // optimum (1/2, 1/2, 1/2) with value 7/2
        assert_eq!(r.iterations, 3);
        let d = r.denom;
        assert_eq!(r.x_scaled[0] * 2, d);
        assert_eq!(r.x_scaled[1] * 2, d);
        assert_eq!(r.x_scaled[2] * 2, d);
        assert_eq!(r.z * 2, 7 * d);
    }

    #[test]
    fn eq5_with_x1_forced_to_one() {
        let t = eq5_tableau().substitute(0, 1);
        assert_eq!(t.bounds(), vec![2, 0, 1]);
        let r = exact_simplex(&t, 64).unwrap();
        // remaining variables zero, value 3 from the substitution
        assert_eq!(r.z % r.denom, 0);
        assert_eq!(r.z / r.denom, 3);
        assert_eq!(r.x_scaled[0], 0);
        assert_eq!(r.x_scaled[1], 0);
        assert_eq!(r.x_scaled[2], 0);
    }

    #[test]
    fn all_zero_objective_terminates_immediately() {
        let t = PlainTableau::from_inequalities(
            &[0, 0],
            &[vec![1, 0], vec![0, 1]],
            &[1, 1],
        )
        .unwrap();
        let r = exact_simplex(&t, 16).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.z, 0);
        assert_eq!(r.denom, 1);
        // structural solution is zero; the slacks carry the bounds
        assert!(r.x_scaled[..t.n_struct].iter().all(|&v| v == 0));
        assert_eq!(&r.x_scaled[t.n_struct..], &[1, 1]);
    }

    #[test]
    fn unbounded_detected() {
        let t = PlainTableau::from_inequalities(&[1], &[vec![-1]], &[1]).unwrap();
        assert!(matches!(exact_simplex(&t, 16), Err(Error::Unbounded)));
    }

    #[test]
    fn matches_rational_shadow_on_random_instances() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for case in 0..200 {
            let m = rng.gen_range(1..5usize);
            let n = rng.gen_range(1..5usize);
            let c: Vec<i128> = (0..n).map(|_| rng.gen_range(-3..6)).collect();
            let a: Vec<Vec<i128>> = (0..m)
                .map(|_| (0..n).map(|_| rng.gen_range(0..4)).collect())
                .collect();
            let b: Vec<i128> = (0..m).map(|_| rng.gen_range(0..5)).collect();
            // keep every column bounded so the LP is bounded
            let mut a = a;
            for j in 0..n {
                if a.iter().all(|row| row[j] == 0) {
                    a[0][j] = 1;
                }
            }
            let t = PlainTableau::from_inequalities(&c, &a, &b).unwrap();
            let ff = exact_simplex(&t, 256).unwrap();
            let (x_rat, z_rat, iters) = rational_simplex(&t);
            let big = |v: i128| BigRational::from(BigInt::from(v));
            assert_eq!(iters, ff.iterations, "case {case}");
            assert_eq!(big(ff.z) / big(ff.denom), z_rat, "case {case}");
            for j in 0..t.n() {
                assert_eq!(big(ff.x_scaled[j]) / big(ff.denom), x_rat[j], "case {case} var {j}");
            }
        }
    }

    /// The scaled tableau equals the final pivot times the rational tableau
    /// after every pivot (fraction-free identity) on a fixed instance.
    #[test]
    fn fraction_free_identity_shadow() {
        let t = eq5_tableau();
        let big = |v: i128| BigRational::from(BigInt::from(v));
        // replay fraction-free pivots and a rational mirror side by side
        let mut ff = t.clone();
        let mut rat: Vec<Vec<BigRational>> = t
            .rows
            .iter()
            .map(|r| r.iter().map(|&v| big(v)).collect())
            .collect();
        let mut denom: i128 = 1;
        let bc = t.bound_col();
        loop {
            let Some(col) = (0..ff.n()).find(|&j| ff.rows[0][j] > 0) else {
                break;
            };
            let row = ratio_test(&ff, col).unwrap().unwrap();
            denom = pivot_update(&mut ff, row, col, denom).unwrap();
            // rational pivot
            let pivot = rat[row][col].clone();
            for j in 0..=bc {
                rat[row][j] = &rat[row][j] / &pivot;
            }
            for i in 0..=t.m {
                if i != row && !rat[i][col].is_zero() {
                    let f = rat[i][col].clone();
                    for j in 0..=bc {
                        let sub = &f * &rat[row][j];
                        rat[i][j] = &rat[i][j] - sub;
                    }
                }
            }
            for i in 0..=t.m {
                for j in 0..=bc {
                    assert_eq!(big(ff.rows[i][j]), &rat[i][j] * big(denom), "({i},{j})");
                }
            }
        }
    }
}
