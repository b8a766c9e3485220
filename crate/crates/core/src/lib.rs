//! Translationally invariant quantum query algorithms for inserting one item
//! into an ordered list of `N - 1` items.
//!
//! The crate works in the `2N`-dimensional doubled-domain Hilbert space where
//! every oracle `F_j` is a cyclic translate of `F_0`. Algorithms whose
//! inter-query unitaries commute with translation are diagonal in the
//! momentum basis and are described by one phase per momentum per stage
//! (a [`PhaseSchedule`]).
//!
//! Modules:
//!
//! - [`hilbert`]: states, bases, oracle, translation and the schedule runner.
//! - [`greedy`]: the stage-wise greedy phase choice and its probability recursion.
//! - [`bounds`]: the invariant-algorithm overlap bound and query lower bound.
//! - [`exact`]: cosine-series feasibility, matching conditions and the LP search.
//! - [`synth`]: spectral factorization and exact schedule synthesis.
//! - [`compose`]: iterating an exact `(M, k)` schedule to solve `N = M^h`.
//! - [`cli`]: command dispatch and report formatting used by the binary.

pub mod bounds;
pub mod cli;
pub mod compose;
pub mod error;
pub mod exact;
pub mod greedy;
pub mod hilbert;
pub mod synth;

pub use error::{Error, Result};
pub use hilbert::{Basis, Oracle, PhaseSchedule, Sign, StateVector};

pub use num_complex::Complex64;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
