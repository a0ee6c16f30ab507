//! U-statistics of dependent time series and their block bootstrap.
//!
//! The crate computes bivariate U- and V-statistics together with their
//! empirical Hoeffding decomposition, resamples stationary series with the
//! circular, moving and non-overlapping block bootstrap, estimates long-run
//! variances, selects block lengths by subsampling, and drives the Monte
//! Carlo experiments that compare the bootstrap approximation of
//! `sqrt(n) (U_n - theta)` against a normal approximation.
//!
//! The crate is `no_std` (with `alloc`); all floating-point special
//! functions go through `libm` so that seeded simulations are bit-stable
//! across platforms. IO, file formats and the command line live in the
//! companion `ustat-boot` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod blocksel;
pub mod error;
pub mod experiments;
pub mod kernels;
pub mod lrv;
pub mod procgen;
pub mod resample;
pub mod ustat;

mod math;

pub use error::{Error, Result};
