//! Data-driven block-length selection by subsampling.
//!
//! A pilot bootstrap variance of the full sample (block length `l*`) is the
//! target; every window of `m` consecutive observations is bootstrapped
//! with candidate block length `l` and
//!
//! ```text
//! MSE_hat(l) = (1/(n-m+1)) sum_k ( Var*_l[window k] - Var*_{l*}[full] )^2
//! ```
//!
//! is minimized over the grid `ceil(eps m^{1/3}) <= l <= floor(m^{1/3}/eps)`.
//! The minimizer is rescaled by `(n/m)^{1/3}` and rounded to give the
//! estimated optimal block length for the full sample.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::math;
use crate::procgen::RngStream;
use crate::resample::{
    bootstrap_distribution, bootstrap_variance, BlockScheme, CenterPolicy, SchemeKind,
};
use crate::ustat::Sample;

/// Substream index reserved for the pilot target so candidate block lengths
/// (which are >= 1) can never collide with it.
const TARGET_STREAM: u64 = 0;

/// Tuning constants of the subsampling selector.
#[derive(Clone, Copy, Debug)]
pub struct BlockSelectConfig {
    /// Pilot block length `l*` for the full-sample target variance.
    pub pilot_block_length: usize,
    /// Window length `m`.
    pub subsample_size: usize,
    /// Grid width parameter in (0, 1).
    pub epsilon: f64,
    /// Bootstrap replicates per variance estimate.
    pub boot_reps: usize,
}

impl BlockSelectConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.subsample_size < 2 {
            return Err(Error::InvalidConfig("subsample size must be at least 2"));
        }
        if self.subsample_size >= n {
            return Err(Error::InvalidConfig(
                "subsample size must be smaller than the sample",
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidConfig("epsilon must lie in (0, 1)"));
        }
        if self.pilot_block_length == 0 || self.pilot_block_length > n {
            return Err(Error::InvalidBlockLength {
                block_length: self.pilot_block_length,
                limit: n,
            });
        }
        if self.boot_reps < 2 {
            return Err(Error::InsufficientReplicates {
                needed: 2,
                got: self.boot_reps,
            });
        }
        self.grid()?;
        Ok(())
    }

    /// Inclusive candidate grid, clamped to `[1, m]` so every candidate is
    /// admissible for a window.
    pub fn grid(&self) -> Result<(usize, usize)> {
        let m_cbrt = math::cbrt(self.subsample_size as f64);
        let lower = math::ceil(self.epsilon * m_cbrt) as usize;
        let upper = math::floor(m_cbrt / self.epsilon) as usize;
        let lower = lower.max(1);
        let upper = upper.min(self.subsample_size);
        if lower > upper {
            return Err(Error::InvalidConfig("block-length grid is empty"));
        }
        Ok((lower, upper))
    }
}

/// Result of [`select_block_length`].
#[derive(Clone, Debug)]
pub struct BlockSelectResult {
    /// The estimated optimal block length for the full sample.
    pub block_length: usize,
    /// `(l, MSE_hat(l))` over the candidate grid.
    pub mse_curve: Vec<(usize, f64)>,
}

/// `Var*[sqrt(bl) U*]` of one series at one block length, Monte Carlo
/// centered (centering does not affect the variance).
fn boot_variance(
    kernel: &Kernel,
    series: &Sample,
    scheme: BlockScheme,
    reps: usize,
    rng: &RngStream,
) -> Result<f64> {
    let dist = bootstrap_distribution(kernel, series, scheme, reps, CenterPolicy::MonteCarlo, rng)?;
    bootstrap_variance(&dist)
}

/// Mean squared deviation of the window bootstrap variances at block length
/// `l` from the full-sample pilot target.
pub fn mse_hat(
    l: usize,
    sample: &Sample,
    kernel: &Kernel,
    cfg: &BlockSelectConfig,
    kind: SchemeKind,
    rng: &RngStream,
) -> Result<f64> {
    let n = sample.len();
    cfg.validate(n)?;
    let m = cfg.subsample_size;
    if l == 0 || l > m {
        return Err(Error::InvalidBlockLength {
            block_length: l,
            limit: m,
        });
    }

    let target = boot_variance(
        kernel,
        sample,
        BlockScheme {
            kind,
            block_length: cfg.pilot_block_length,
        },
        cfg.boot_reps,
        &rng.child(TARGET_STREAM),
    )?;

    let window_scheme = BlockScheme {
        kind,
        block_length: l,
    };
    let window_rng = rng.child(l as u64);
    let mut acc = math::KahanSum::new();
    let windows = n - m + 1;
    for k in 0..windows {
        let window = sample.window(k, m)?;
        let v = boot_variance(
            kernel,
            &window,
            window_scheme,
            cfg.boot_reps,
            &window_rng.child(1 + k as u64),
        )?;
        let d = v - target;
        acc.add(d * d);
    }
    Ok(acc.total() / windows as f64)
}

/// Minimizes [`mse_hat`] over the grid (ties resolve to the smallest `l`)
/// and rescales the minimizer by `(n/m)^{1/3}`.
pub fn select_block_length(
    sample: &Sample,
    kernel: &Kernel,
    cfg: &BlockSelectConfig,
    kind: SchemeKind,
    rng: &RngStream,
) -> Result<BlockSelectResult> {
    let n = sample.len();
    cfg.validate(n)?;
    let (lower, upper) = cfg.grid()?;

    let mut mse_curve = Vec::with_capacity(upper - lower + 1);
    let mut best: Option<(usize, f64)> = None;
    for l in lower..=upper {
        let mse = mse_hat(l, sample, kernel, cfg, kind, rng)?;
        mse_curve.push((l, mse));
        if best.map_or(true, |(_, prev)| mse < prev) {
            best = Some((l, mse));
        }
    }
    let (argmin, _) = best.expect("grid is nonempty");

    let factor = math::cbrt(n as f64 / cfg.subsample_size as f64);
    let scaled = math::round(factor * argmin as f64);
    let block_length = (scaled as usize).clamp(1, n);
    Ok(BlockSelectResult {
        block_length,
        mse_curve,
    })
}
