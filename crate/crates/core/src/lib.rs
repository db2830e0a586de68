//! Membership filters and membership-head analysis.
//!
//! * [`filters`] – classical Bloom filter and its false-positive model.
//! * [`ds_filters`] – distance-sensitive filters built from random-hyperplane
//!   hashes, plus multi-resolution banks.
//! * [`model_fit`] – capacity-curve fitting and competing-model comparison.
//! * [`stats`] – the nonparametric tests the analyses rely on.
//! * [`head_analysis`] – ingestion of exported attention records and every
//!   per-head analysis built on them.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ds_filters;
pub mod error;
pub mod filters;
pub mod head_analysis;
pub mod model_fit;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
