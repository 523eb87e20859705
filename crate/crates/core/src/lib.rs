//! Ekeland points with certificates.
//!
//! Given a functional `F` bounded below on a complete metric space and a start
//! point `u` with `F(u) <= inf F + ε`, [`solver::run`] builds the descent
//! sequence `u_1 = u, u_2, ...` and returns a point `v` with
//!
//! 1. `d(u, v) <= 1`,
//! 2. `F(v) <= F(u)`,
//! 3. `F(v) <= F(w) + ε·d(v, w)` for every `w`,
//! 4. `||δF(v)||_* <= ε` when `F` is differentiable on a normed space,
//! 5. `δ²F(v)(φ, φ) >= -4ε||φ|| - 2R/ε²` for a second-order run,
//!
//! and [`certificate::certify`] re-checks each conclusion independently with a
//! signed margin. On finite spaces [`oracle`] provides exact ground truth.
//!
//! Normed spaces are finite-dimensional (`l1`, `l2`, `linf`).

// `!(a <= b)` is how NaN is rejected; matrix code indexes pairs symmetrically.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod certificate;
pub mod cli;
pub mod error;
pub mod functional;
pub mod oracle;
pub mod problem;
pub mod solver;
pub mod space;

pub use certificate::{certify, Certificate, CertItem, ItemId, Mode, Overall, Status, VerifierConfig};
pub use error::{Error, Result};
pub use functional::{ExtReal, Functional};
pub use solver::{CandidateSampler, IterationTrace, SolverConfig, Termination};
pub use space::{MetricSpace, NormKind, Point};
