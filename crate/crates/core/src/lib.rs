//! Radial wave equation in `n ≥ 4` space dimensions: Riemann-operator
//! evaluation, oracle solutions and decay-estimate verification.

// `!(x > 0.0)` is the NaN-rejecting form used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod jets;
pub mod kernels;
pub mod params;
pub mod poly;
pub mod oracle;
pub mod quadrature;
pub mod riemann;
pub mod suites;

pub use error::{Error, Result};
pub use params::{bracket, dim_params, DimParams, Tolerances};
