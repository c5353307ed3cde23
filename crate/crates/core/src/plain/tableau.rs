//! Exact-integer simplex tableaus.
//!
//! Layout: row 0 holds the objective coefficients with the objective cell
//! in the last column (sign flipped: the cell carries minus the accumulated
//! objective value); rows `1..=m` hold the constraints with the bound
//! column last. Columns are structural variables, then slack variables,
//! then the bound. All entries stay integers across pivots; the tableau is
//! the last pivot value times the classical rational tableau.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlainTableau {
    /// Constraint count.
    pub m: usize,
    /// Structural (decision) variable count.
    pub n_struct: usize,
    /// Slack variable count (== m for inequality-derived tableaus).
    pub n_slack: usize,
    /// `(m + 1) x (n_struct + n_slack + 1)` entries.
    pub rows: Vec<Vec<i128>>,
}

impl PlainTableau {
    /// Total variable count (structural + slack).
    pub fn n(&self) -> usize {
        self.n_struct + self.n_slack
    }

    /// Bound-column index.
    pub fn bound_col(&self) -> usize {
        self.n()
    }

    /// Build a maximization tableau from `max c^T x` subject to `A x <= b`,
    /// `x >= 0`, adding one slack per constraint.
    pub fn from_inequalities(c: &[i128], a: &[Vec<i128>], b: &[i128]) -> Result<Self> {
        let m = a.len();
        let n_struct = c.len();
        if b.len() != m || a.iter().any(|row| row.len() != n_struct) {
            return Err(Error::InvalidInput("inconsistent tableau dimensions".into()));
        }
        let width = n_struct + m + 1;
        let mut rows = Vec::with_capacity(m + 1);
        let mut obj = vec![0i128; width];
        obj[..n_struct].copy_from_slice(c);
        rows.push(obj);
        for (i, (ar, &bi)) in a.iter().zip(b).enumerate() {
            let mut row = vec![0i128; width];
            row[..n_struct].copy_from_slice(ar);
            row[n_struct + i] = 1;
            row[width - 1] = bi;
            rows.push(row);
        }
        Ok(PlainTableau {
            m,
            n_struct,
            n_slack: m,
            rows,
        })
    }

    /// Substitute `x_col := v` (v in {0, 1}): zero the column and absorb
    /// `v` times the column into the bound column (objective cell included).
    /// This is the plaintext mirror of the oblivious branching update.
    pub fn substitute(&self, col: usize, v: i128) -> PlainTableau {
        let bc = self.bound_col();
        let mut out = self.clone();
        for row in out.rows.iter_mut() {
            let d = row[col];
            row[col] = 0;
            row[bc] -= d * v;
        }
        out
    }

    /// Bound entries `b_1..b_m`.
    pub fn bounds(&self) -> Vec<i128> {
        let bc = self.bound_col();
        self.rows[1..].iter().map(|r| r[bc]).collect()
    }
}
