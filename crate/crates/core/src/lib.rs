//! Option pricing with the Dobrić-Ojeda Gaussian Markov process as a
//! semimartingale stand-in for fractional Brownian motion.
//!
//! - [`constants`]: H-dependent constants (`a_H`, `c_M`, `c_psi`, `C`, `d_H`, `delta(H)`).
//! - [`path_sim`]: `M_H`, `V_H`, `V^eps`, fBm and stock-path simulation.
//! - [`quad_var`]: sample quadratic variation and the convergence harness.
//! - [`estimate`]: ergodic-ratio and quadratic-variation-ratio estimators.
//! - [`pricing`]: closed-form, finite-difference and Monte Carlo call prices.
//! - [`backtest`]: rolling three-model historical comparison.

// `!(x > 0.0)` is used throughout to reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backtest;
pub mod constants;
pub mod error;
pub mod estimate;
pub mod exec;
pub mod fmt;
pub mod path_sim;
pub mod pricing;
pub mod quad_var;
pub mod special;
pub mod stats;

pub use constants::{derive_constants, HurstBounds, HurstConstants};
pub use error::{Error, Result};
pub use exec::Exec;
pub use path_sim::{MScheme, ModelKind, ModelParams, PathSeed, SamplePath, TimeGrid};
