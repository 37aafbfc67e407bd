//! Deterministic probes of the `L²_t L^∞_x` Strichartz estimate for the
//! half-wave propagator `e^{it|D|}`, tested against a source moving at speed `c`.

// `!(x > 0.0)` is the NaN-rejecting form used for argument checks
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod divergence;
pub mod error;
pub mod grid;
pub mod profiles;
pub mod quadrature;
pub mod reduced;
pub mod report;

pub use error::{Error, Result};
