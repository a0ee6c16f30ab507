//! Long-run variance estimation and the delta-method normal approximation
//! for the variance estimator.
//!
//! The truncated estimator sums sample autocovariances up to a lag cutoff:
//! `gamma_0 + 2 sum_{k<=L} gamma_k`, with divisor-`n` autocovariances. The
//! delta-method estimator plugs truncated moment covariances of `(X, X^2)`
//! into
//!
//! ```text
//! var_hat[s^2] = 1/(n-1)^2 * ( sum_{|i-j|<=L} (X2_i - m2)(X2_j - m2)
//!                - 4 xbar sum_{|i-j|<=L} (X2_i - m2)(X_j - xbar)
//!                + 4 xbar^2 sum_{|i-j|<=L} (X_i - xbar)(X_j - xbar) )
//! ```
//!
//! with `X2_i = X_i^2`, `m2 = avg(X2)`. Both estimators can go negative
//! under truncated flat weights and are floored at zero, flagged.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{self, KahanSum};
use crate::ustat::Sample;

/// Which estimator produced an [`LrvEstimate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LrvEstimator {
    TruncatedSum,
    DeltaMethod,
}

/// A long-run variance scale estimate.
#[derive(Clone, Copy, Debug)]
pub struct LrvEstimate {
    /// Nonnegative variance scale (after flooring).
    pub value: f64,
    /// Truncation lag `L`.
    pub lag_cutoff: usize,
    pub estimator: LrvEstimator,
    /// True when a negative raw estimate was floored to zero.
    pub floored: bool,
}

/// Sample autocovariance with divisor `n`:
/// `gamma_k = (1/n) sum_{i=1}^{n-k} (Y_i - Ybar)(Y_{i+k} - Ybar)`.
pub fn autocovariance(series: &Sample, lag: usize) -> Result<f64> {
    let v = series.values();
    let n = v.len();
    if lag >= n {
        return Err(Error::InvalidLag { lag, len: n });
    }
    let mean = math::mean(v);
    let mut acc = KahanSum::new();
    for i in 0..n - lag {
        acc.add((v[i] - mean) * (v[i + lag] - mean));
    }
    Ok(acc.total() / n as f64)
}

/// Truncated long-run variance `gamma_0 + 2 sum_{k=1}^{L} gamma_k`, floored
/// at zero.
pub fn lrv_truncated(series: &Sample, max_lag: usize) -> Result<LrvEstimate> {
    let n = series.len();
    if max_lag >= n {
        return Err(Error::InvalidLag {
            lag: max_lag,
            len: n,
        });
    }
    let mut acc = KahanSum::new();
    acc.add(autocovariance(series, 0)?);
    for k in 1..=max_lag {
        acc.add(2.0 * autocovariance(series, k)?);
    }
    let raw = acc.total();
    let floored = raw < 0.0;
    Ok(LrvEstimate {
        value: if floored { 0.0 } else { raw },
        lag_cutoff: max_lag,
        estimator: LrvEstimator::TruncatedSum,
        floored,
    })
}

/// Truncated cross-covariance sum `sum_{|i-j|<=L} a_i b_j` over all ordered
/// index pairs, in O(n L).
fn truncated_cross_sum(a: &[f64], b: &[f64], max_lag: usize) -> f64 {
    let n = a.len();
    let mut acc = KahanSum::new();
    for i in 0..n {
        acc.add(a[i] * b[i]);
    }
    for k in 1..=max_lag {
        for i in 0..n - k {
            acc.add(a[i] * b[i + k] + a[i + k] * b[i]);
        }
    }
    acc.total()
}

/// Delta-method variance estimate for the sample variance, floored at zero.
pub fn delta_method_var_hat(series: &Sample, max_lag: usize) -> Result<f64> {
    Ok(delta_method_estimate(series, max_lag)?.value)
}

/// [`delta_method_var_hat`] with the flooring flag and lag attached.
pub fn delta_method_estimate(series: &Sample, max_lag: usize) -> Result<LrvEstimate> {
    let v = series.values();
    let n = v.len();
    if max_lag >= n {
        return Err(Error::InvalidLag {
            lag: max_lag,
            len: n,
        });
    }
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }

    let xbar = math::mean(v);
    let squares: Vec<f64> = v.iter().map(|&x| x * x).collect();
    let m2 = math::mean(&squares);
    let centered: Vec<f64> = v.iter().map(|&x| x - xbar).collect();
    let centered_sq: Vec<f64> = squares.iter().map(|&x2| x2 - m2).collect();

    let t_sq_sq = truncated_cross_sum(&centered_sq, &centered_sq, max_lag);
    let t_sq_x = truncated_cross_sum(&centered_sq, &centered, max_lag);
    let t_x_x = truncated_cross_sum(&centered, &centered, max_lag);

    let denom = (n - 1) as f64 * (n - 1) as f64;
    let raw = (t_sq_sq - 4.0 * xbar * t_sq_x + 4.0 * xbar * xbar * t_x_x) / denom;
    let floored = raw < 0.0;
    Ok(LrvEstimate {
        value: if floored { 0.0 } else { raw },
        lag_cutoff: max_lag,
        estimator: LrvEstimator::DeltaMethod,
        floored,
    })
}

/// Standard normal CDF via `erfc`, absolute accuracy well below 1e-10.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * math::erfc(-x / core::f64::consts::SQRT_2)
}
