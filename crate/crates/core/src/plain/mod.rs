//! Plaintext reference implementations: the exact integer-pivoting simplex,
//! branch-and-bound, the exhaustive cycle-packing oracle and solution
//! verification. These are the executable specification the secret-shared
//! protocols are tested against.

mod branch_bound;
mod brute;
mod simplex;
mod tableau;
mod verify;

pub use branch_bound::{plain_branch_and_bound, PlainBbResult};
pub use brute::{brute_force_kep, enumerate_cycles, Cycle};
pub use simplex::{exact_simplex, pivot_update, ratio_test, PlainLpResult};
pub use tableau::PlainTableau;
pub use verify::verify_solution;

/// The three-variable demo program used across the solver tests:
/// `max 3x1 + 2x2 + 2x3` under three packing constraints with bound 3.
pub fn demo_ip_tableau() -> PlainTableau {
    PlainTableau::from_inequalities(
        &[3, 2, 2],
        &[vec![1, 2, 3], vec![3, 1, 2], vec![2, 3, 1]],
        &[3, 3, 3],
    )
    .expect("static dimensions")
}
