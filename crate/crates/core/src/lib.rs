//! Channel-aware optimal transport: closed-form distortion curves for binary
//! and Gaussian sources, a finite-alphabet hybrid-coding achievability
//! evaluator, rate-limited and exact transport solvers, cost-constrained
//! capacity, and Monte Carlo / random-coding simulators.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod binary;
pub mod cli;
pub mod curves;
pub mod error;
pub mod gaussian;
pub mod hybrid;
pub mod infokit;
pub mod numkit;
pub mod plot;
pub mod sim;

pub use error::{Error, Result};
