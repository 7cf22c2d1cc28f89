//! Linearized quantum model of a mirror levitated by the radiation pressure of
//! a Fabry-Perot cavity field: steady states, stability, output sideband
//! covariance matrices, entanglement and squeezing.

// Range checks are written as `!(x <= limit)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod gaussian;
pub mod linearization;
pub mod operating_point;
pub mod params;
pub mod precision;
pub mod spectra;
pub mod steady_state;
pub mod sweep;

pub use error::{Error, Result};
