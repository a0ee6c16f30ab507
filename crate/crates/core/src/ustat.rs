//! U- and V-statistics and the empirical Hoeffding decomposition.
//!
//! For a symmetric kernel `h` and observations `X_1..X_n`,
//!
//! ```text
//! U_n(h) = 2 / (n (n - 1)) * sum_{i < j} h(X_i, X_j)
//! V_n(h) = 1 / n^2        * sum_{i, j}  h(X_i, X_j)
//! ```
//!
//! The empirical decomposition centers at `theta_hat = U_n(h)` with the
//! jackknife-style first-order values
//! `g1(X_i) = (1/(n-1)) sum_{j != i} h(X_i, X_j) - theta_hat`, which makes
//! the linear part `(2/n) sum_i g1(X_i)` identically zero and the identity
//! `U_n = theta_hat + linear + degenerate` exact up to rounding. All pair
//! sums use compensated accumulation so the identity survives at the 1e-12
//! scale.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::math::{self, KahanSum};
use crate::procgen::{ProcessSpec, RngStream};

/// An ordered series of finite observations.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    /// Rejects NaN and infinite entries so downstream kernels never see
    /// them.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Sample { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Copy of a contiguous window, for subsampling.
    pub fn window(&self, start: usize, len: usize) -> Result<Sample> {
        if start + len > self.values.len() {
            return Err(Error::InvalidConfig("window exceeds the sample"));
        }
        Ok(Sample {
            values: self.values[start..start + len].to_vec(),
        })
    }
}

fn require_len(sample: &Sample, needed: usize) -> Result<()> {
    if sample.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: sample.len(),
        });
    }
    Ok(())
}

/// Mean of the kernel over all unordered pairs; O(n^2) evaluations.
pub fn u_statistic(kernel: &Kernel, sample: &Sample) -> Result<f64> {
    require_len(sample, 2)?;
    let v = sample.values();
    let n = v.len();
    let mut acc = KahanSum::new();
    for i in 0..n {
        for j in i + 1..n {
            acc.add(kernel.eval(v[i], v[j]));
        }
    }
    Ok(acc.total() / pair_count(n))
}

/// Mean of the kernel over all ordered pairs, diagonal included.
pub fn v_statistic(kernel: &Kernel, sample: &Sample) -> Result<f64> {
    require_len(sample, 1)?;
    let v = sample.values();
    let n = v.len();
    let mut acc = KahanSum::new();
    for i in 0..n {
        acc.add(kernel.eval(v[i], v[i]));
        for j in i + 1..n {
            acc.add(2.0 * kernel.eval(v[i], v[j]));
        }
    }
    Ok(acc.total() / (n as f64 * n as f64))
}

#[inline]
fn pair_count(n: usize) -> f64 {
    n as f64 * (n - 1) as f64 / 2.0
}

/// Unbiased sample variance, the closed form of the variance-kernel
/// U-statistic. Kept as an independent route and used as the hot-loop
/// shortcut once the equivalence is established.
pub fn sample_variance(values: &[f64]) -> f64 {
    math::sample_variance(values)
}

/// `U_n` with the variance-kernel shortcut; falls back to the O(n^2) pair
/// sum for every other kernel.
pub(crate) fn u_statistic_value(kernel: &Kernel, sample: &Sample) -> Result<f64> {
    require_len(sample, 2)?;
    if kernel.is_variance() {
        Ok(math::sample_variance(sample.values()))
    } else {
        u_statistic(kernel, sample)
    }
}

/// The empirical Hoeffding decomposition of `U_n(h)`.
#[derive(Clone, Debug)]
pub struct HoeffdingParts {
    /// `U_n(h)`, the empirical center.
    pub theta_hat: f64,
    /// First-order values `g1(X_i)`.
    pub h1_hat: Vec<f64>,
    /// `(2/n) sum_i g1(X_i)`; zero up to rounding by construction.
    pub linear: f64,
    /// `U_n(h2_hat)` with `h2_hat(x, y) = h(x, y) - g1(x) - g1(y) - theta_hat`,
    /// summed directly. Also zero up to rounding: centering at `U_n` makes
    /// the pairwise remainder cancel exactly, which is what the identity
    /// tests pin down.
    pub degenerate: f64,
}

pub fn hoeffding_decompose(kernel: &Kernel, sample: &Sample) -> Result<HoeffdingParts> {
    require_len(sample, 2)?;
    let v = sample.values();
    let n = v.len();

    // One symmetric pass fills the total and the per-row sums.
    let mut total = KahanSum::new();
    let mut rows: Vec<KahanSum> = alloc::vec![KahanSum::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let h = kernel.eval(v[i], v[j]);
            total.add(h);
            rows[i].add(h);
            rows[j].add(h);
        }
    }
    let theta_hat = total.total() / pair_count(n);
    let h1_hat: Vec<f64> = rows
        .iter()
        .map(|r| r.total() / (n - 1) as f64 - theta_hat)
        .collect();

    let mut linear_acc = KahanSum::new();
    for &g in &h1_hat {
        linear_acc.add(g);
    }
    let linear = 2.0 / n as f64 * linear_acc.total();

    // Second pass sums the centered kernel directly rather than solving for
    // the remainder, so the decomposition identity stays a real check.
    let mut degen = KahanSum::new();
    for i in 0..n {
        for j in i + 1..n {
            degen.add(kernel.eval(v[i], v[j]) - h1_hat[i] - h1_hat[j] - theta_hat);
        }
    }
    let degenerate = degen.total() / pair_count(n);

    Ok(HoeffdingParts {
        theta_hat,
        h1_hat,
        linear,
        degenerate,
    })
}

/// Monte Carlo estimate of `E[n U_n^2(k)]` over independent simulated
/// series, one RNG substream per replication.
///
/// Meant for a *degenerate* kernel `k = h2`, i.e. one whose conditional
/// expectation against the process marginal vanishes, so that the scaled
/// statistic decays; [`crate::kernels::population_components`] produces
/// such kernels for discrete laws, and the variance kernel on a mean-zero
/// marginal has the closed form `h2(x, y) = -x y`. Note the empirical
/// decomposition cannot supply `h2` here: with `theta_hat = U_n` the
/// identity `sum_{i<j} h2_hat = 0` holds pointwise per sample, so
/// `U_n(h2_hat)` is identically zero and only population centering leaves
/// a nontrivial degenerate part.
pub fn degenerate_second_moment(
    kernel: &Kernel,
    process: &ProcessSpec,
    n: usize,
    reps: usize,
    rng: &RngStream,
) -> Result<f64> {
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    if reps == 0 {
        return Err(Error::InsufficientReplicates { needed: 1, got: 0 });
    }
    process.validate()?;
    let mut acc = KahanSum::new();
    for rep in 0..reps {
        let mut sub = rng.child(rep as u64);
        let series = process.simulate(n, &mut sub)?;
        let u = u_statistic(kernel, &series)?;
        acc.add(n as f64 * u * u);
    }
    Ok(acc.total() / reps as f64)
}
