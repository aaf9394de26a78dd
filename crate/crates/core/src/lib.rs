//! Proximal incremental aggregated gradient (PIAG) method for
//!
//! ```text
//! minimize  F(x) = f_1(x) + ... + f_N(x) + h(x)
//! ```
//!
//! where every `f_i` is smooth (possibly nonconvex) and `h` is a proper closed
//! convex function with a closed-form proximal operator. Each iteration uses an
//! aggregate of component gradients evaluated at stale iterates, with staleness
//! bounded by a delay parameter `tau`.
//!
//! Besides the solver, the crate ships the tooling used to check its
//! convergence guarantees numerically: descent and summability inequalities
//! along traces, the scalar recursion lemmas used by the rate proofs, stepsize
//! thresholds and rate constants, R-linear rate fitting, and generators for
//! quadratic test problems with enumerable stationary sets.

pub mod delay;
pub mod diagnostics;
mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod problems;
pub mod prox;
pub mod solver;

pub use error::{PiagError, Result};
pub use model::{Problem, Vector};
