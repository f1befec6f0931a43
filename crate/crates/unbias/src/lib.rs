//! Unbiased postprocessing of noisy statistics.
//!
//! Privacy mechanisms release statistics with additive noise; downstream
//! consumers usually need a *function* of the statistic, and plugging the
//! noisy value in directly is biased. This crate removes that bias:
//!
//! - closed-form second-order corrections under Laplace noise
//!   ([`laplace_debias`]);
//! - optimal polynomial extensions when the function is only smooth on a
//!   half-line ([`extension_optimizer`]);
//! - ratio-of-releases mean estimation built on those extensions
//!   ([`mean_mechanisms`]);
//! - noised-before-aggregation sums with per-record privacy accounting
//!   ([`prdp`]);
//! - moment-matrix debiasing of polynomials under arbitrary noise with known
//!   moments ([`general_noise`]).
//!
//! Everything randomized is seeded and stream-addressed ([`noise`], [`mc`]),
//! so runs reproduce bit-for-bit.

pub use nalgebra;

pub mod cli;
pub mod error;
pub mod extension_optimizer;
pub mod function_model;
pub mod general_noise;
pub mod laplace_debias;
pub mod mc;
pub mod mean_mechanisms;
pub mod noise;
pub mod prdp;
pub mod quadrature;
pub mod report;

pub use error::{Error, Result};
