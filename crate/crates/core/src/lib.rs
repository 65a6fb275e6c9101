//! Replica-symmetric predictions and Monte Carlo verification for
//! l1-regularized least-absolute-deviation recovery of sparse signals
//! observed through sparse noise.
//!
//! * [`special_fns`]: Gaussian tail and the auxiliary functions `s`, `r_lambda`.
//! * [`replica`]: fixed-point solvers, phase boundaries, lambda optimization.
//! * [`decoder`]: a primal-dual solver for `min ||y - Ax||_1 + lambda ||x||_1`.
//! * [`experiments`]: random ensembles and Monte Carlo aggregation.
//! * [`cli`]: the `sparse-lab` command-line front end.

pub mod cli;
pub mod decoder;
pub mod error;
pub mod experiments;
pub mod replica;
pub mod selftest;
pub mod special_fns;

pub use error::{Error, Result};
