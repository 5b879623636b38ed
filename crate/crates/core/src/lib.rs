//! Panel causal-inference toolkit: balanced log-return panels, two-way
//! fixed-effects DID, synthetic DID with simplex-constrained weights and
//! bootstrap inference, attention interaction regressions, and synthetic
//! panels with brute-force oracles.
//!
//! Everything is generic over the floating-point type; the aliases below
//! fix it to `f64`.
//!
//! `!(x > y)` comparisons are deliberate throughout: they also reject NaN.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod attention;
pub mod did;
pub mod error;
pub mod linalg;
pub mod panel_core;
pub mod regression;
mod scalar;
pub mod sdid;
pub mod stats;
pub mod synthgen;

pub use error::{Error, ErrorKind, Result};
pub use scalar::Scalar;

pub type Matrix = linalg::Matrix<f64>;
pub type Panel = panel_core::Panel<f64>;
pub type RawRecord = panel_core::RawRecord<f64>;
pub type AttEstimate = did::AttEstimate<f64>;
pub type SdidWeights = sdid::SdidWeights<f64>;
pub type SdidResult = sdid::SdidResult<f64>;
pub type SdidOptions = sdid::SdidOptions<f64>;
pub type AttentionSeries = attention::AttentionSeries<f64>;
pub type AttentionRegressionResult = attention::AttentionRegressionResult<f64>;
