//! Privacy-preserving kidney exchange by secret-shared integer programming.
//!
//! A pool of patient-donor pairs secret-shares its medical data among a few
//! computing peers; the peers build the compatibility graph obliviously,
//! shuffle it, set up the subset-formulation tableau, and run
//! branch-and-bound over an integer-pivoting simplex entirely on shares.
//! The only values ever made public are the branch-and-bound control bits
//! (the tree structure), a per-iteration simplex termination bit, and the
//! final exchange partners — which is exactly what the leakage audit checks.
//!
//! Module map:
//!
//! * [`field`], [`shamir`] — prime fields and `(t, kappa)` secret sharing.
//! * [`runtime`] — peers, transports, rounds, traffic meters, transcript.
//! * [`primitives`] — multiplication, comparison, selection, prefix-or and
//!   first-positive selection over shares.
//! * [`plain`] — plaintext reference solvers and the brute-force packing
//!   oracle used to verify every run.
//! * [`ppsimplex`], [`ppbb`] — the secret-shared simplex and
//!   branch-and-bound protocols.
//! * [`kep`] — the end-to-end pipeline: compatibility, shuffle, tableau
//!   setup, optimization, cycle resolution, output derivation, audit.
//! * [`gen`] — synthetic patient-donor pools.
//! * [`engine`] — field-dispatched facade used by the CLI.
//! * [`experiment`] — seeded benchmark sweeps with metric records.

// pub mod engine; // (in progress)
// pub mod experiment; // (in progress)
pub mod field;
// pub mod gen; // (in progress)
// pub mod kep; // (in progress)
pub mod plain;
pub mod ppbb;
pub mod ppsimplex;
pub mod primitives;
pub mod runtime;
pub mod shamir;
pub mod trace;

pub use runtime::RuntimeError;
pub use shamir::ShareError;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Share(#[from] ShareError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error("simplex iteration cap {0} exceeded")]
    IterationCap(usize),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("infeasible starting basis")]
    InfeasibleStart,
    #[error("plaintext solver overflow")]
    Overflow,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
