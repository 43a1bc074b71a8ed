//! Derivative-free Levenberg–Marquardt for nonlinear least squares
//! `min ½‖r(x)‖²`, with Jacobians approximated by orthogonal spherical
//! smoothing along random orthonormal frames.
//!
//! The crate contains the solver ([`lm`]), the Jacobian estimators
//! ([`jacobian`]), frame sampling ([`directions`]), a catalog of test
//! problems ([`suite`]), Monte-Carlo checks of the estimator's accuracy
//! guarantees ([`probes`]) and a benchmark harness with performance
//! profiles ([`bench`]).

// NaN inputs must fail range checks, so those are written as `!(x > lo)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod directions;
pub mod error;
pub mod exec;
pub mod jacobian;
pub mod lm;
pub mod probes;
pub mod problem;
pub mod seed;
pub mod suite;

pub use error::{Error, Result};
pub use problem::{Residual, ResidualProblem, StartRule};
