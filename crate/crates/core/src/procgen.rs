//! Seeded generation of stationary test processes.
//!
//! [`RngStream`] is a counter-based generator with cheap splitting: a stream
//! is addressed by a 64-bit key, children are derived by folding an index
//! into the key, and the i-th output is a finalizer hash of `key + i * phi`.
//! Identical `(seed, child path)` pairs produce identical sequences on every
//! platform, and distinct paths give statistically independent streams.
//! That contract is what lets replications be reordered or distributed
//! without changing any result.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::ustat::Sample;

/// 2^64 / golden ratio; the splitmix64 increment.
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
/// Salt folded into child indices so that `child(i)` and the raw output
/// sequence never coincide.
const CHILD_SALT: u64 = 0xA076_1D64_78BD_642F;

/// Stafford "Mix13" finalizer used by splitmix64.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A splittable, counter-based random stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RngStream {
    key: u64,
    counter: u64,
}

impl RngStream {
    /// Root stream of a seed.
    pub fn from_seed(seed: u64) -> Self {
        RngStream {
            key: mix(seed.wrapping_add(GOLDEN)),
            counter: 0,
        }
    }

    /// Root stream addressed by a whole path, e.g.
    /// `(experiment, replication, purpose)`.
    pub fn from_path(seed: u64, path: &[u64]) -> Self {
        let mut s = Self::from_seed(seed);
        for &p in path {
            s = s.child(p);
        }
        s
    }

    /// Derives an independent substream. Children are keyed off the
    /// stream's address, not its consumption state, so the derivation is
    /// insensitive to how many values the parent has produced.
    pub fn child(&self, index: u64) -> Self {
        RngStream {
            key: mix(self.key ^ mix(index.wrapping_add(CHILD_SALT))),
            counter: 0,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform draw from `0..n` without modulo bias (Lemire rejection).
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let threshold = n.wrapping_neg() % n; // 2^64 mod n
        loop {
            let x = self.next_u64();
            let wide = (x as u128) * (n as u128);
            if (wide as u64) >= threshold {
                return (wide >> 64) as u64;
            }
        }
    }

    /// Uniform draw from the open interval (0, 1), on the grid
    /// `(k + 1/2) * 2^-53`. Never returns an endpoint, so it can feed the
    /// inverse normal CDF directly.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal draw via the inverse CDF.
    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        math::inverse_normal_cdf(self.next_f64())
    }
}

/// A stationary process that the harness can simulate.
#[derive(Clone, Debug)]
pub enum ProcessSpec {
    /// `X_t = phi X_{t-1} + e_t` with iid `N(0, sd^2)` innovations,
    /// initialized from the stationary law.
    Ar1 { phi: f64, innovation_sd: f64 },
    /// iid `N(0, sd^2)`.
    IidNormal { sd: f64 },
    /// Finite-state Markov chain; emitted values are the state indices as
    /// reals.
    DiscreteMarkov {
        transition: Vec<Vec<f64>>,
        initial: Vec<f64>,
    },
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessSpec::Ar1 { phi, innovation_sd } => {
                if !(math::abs(*phi) < 1.0) {
                    return Err(Error::NonStationary { phi: *phi });
                }
                if !(*innovation_sd > 0.0) || !innovation_sd.is_finite() {
                    return Err(Error::InvalidParameter("innovation sd must be positive"));
                }
                Ok(())
            }
            ProcessSpec::IidNormal { sd } => {
                if !(*sd > 0.0) || !sd.is_finite() {
                    return Err(Error::InvalidParameter("sd must be positive"));
                }
                Ok(())
            }
            ProcessSpec::DiscreteMarkov {
                transition,
                initial,
            } => {
                validate_stochastic_matrix(transition)?;
                if initial.len() != transition.len() {
                    return Err(Error::InvalidConfig(
                        "initial distribution length does not match the state count",
                    ));
                }
                validate_prob_vector(initial)
            }
        }
    }

    pub fn simulate(&self, n: usize, rng: &mut RngStream) -> Result<Sample> {
        self.validate()?;
        match self {
            ProcessSpec::Ar1 { phi, innovation_sd } => simulate_ar1(n, *phi, *innovation_sd, rng),
            ProcessSpec::IidNormal { sd } => simulate_iid_normal(n, *sd, rng),
            ProcessSpec::DiscreteMarkov {
                transition,
                initial,
            } => simulate_discrete_markov(n, transition, initial, rng),
        }
    }
}

fn validate_prob_vector(probs: &[f64]) -> Result<()> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidConfig(
            "probabilities must be finite and nonnegative",
        ));
    }
    if math::abs(math::sum(probs) - 1.0) > 1e-12 {
        return Err(Error::InvalidConfig("probabilities do not sum to 1"));
    }
    Ok(())
}

fn validate_stochastic_matrix(transition: &[Vec<f64>]) -> Result<()> {
    if transition.is_empty() {
        return Err(Error::EmptyInput);
    }
    let k = transition.len();
    for row in transition {
        if row.len() != k {
            return Err(Error::InvalidConfig("transition matrix is not square"));
        }
        validate_prob_vector(row)?;
    }
    Ok(())
}

/// Stationary AR(1) path: `X_1 ~ N(0, sd^2 / (1 - phi^2))`, then
/// `X_{t+1} = phi X_t + e_{t+1}`.
pub fn simulate_ar1(n: usize, phi: f64, sd: f64, rng: &mut RngStream) -> Result<Sample> {
    if !(math::abs(phi) < 1.0) {
        return Err(Error::NonStationary { phi });
    }
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(Error::InvalidParameter("innovation sd must be positive"));
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let mut values = Vec::with_capacity(n);
    let mut x = rng.next_normal() * sd / math::sqrt(1.0 - phi * phi);
    values.push(x);
    for _ in 1..n {
        x = phi * x + sd * rng.next_normal();
        values.push(x);
    }
    Sample::new(values)
}

pub fn simulate_iid_normal(n: usize, sd: f64, rng: &mut RngStream) -> Result<Sample> {
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(Error::InvalidParameter("sd must be positive"));
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    Sample::new((0..n).map(|_| sd * rng.next_normal()).collect())
}

/// Markov chain path started from `initial`; values are state indices as
/// reals.
pub fn simulate_discrete_markov(
    n: usize,
    transition: &[Vec<f64>],
    initial: &[f64],
    rng: &mut RngStream,
) -> Result<Sample> {
    validate_stochastic_matrix(transition)?;
    if initial.len() != transition.len() {
        return Err(Error::InvalidConfig(
            "initial distribution length does not match the state count",
        ));
    }
    validate_prob_vector(initial)?;
    if n == 0 {
        return Err(Error::EmptyInput);
    }

    let mut state = draw_categorical(initial, rng);
    let mut values = Vec::with_capacity(n);
    values.push(state as f64);
    for _ in 1..n {
        state = draw_categorical(&transition[state], rng);
        values.push(state as f64);
    }
    Sample::new(values)
}

fn draw_categorical(probs: &[f64], rng: &mut RngStream) -> usize {
    let u = rng.next_f64();
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    probs.len() - 1
}
