//! Two bodies on a surface of constant curvature κ: reduced dynamics,
//! relative equilibria, their stability, and continuation through κ = 0.

// `!(x < y)` is used on purpose so that NaN fails range checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod continuation_scan;
pub mod curvature_kernel;
pub mod equilibria;
pub mod error;
pub mod export;
pub mod reduced_system;
pub mod stability;
pub mod symmetry;
pub mod verify;

pub use error::{Error, Result};
