//! Bivariate symmetric kernels and their population Hoeffding components.
//!
//! A kernel `h` is split against a distribution `P` into
//! `h(x, y) = theta + h1(x) + h1(y) + h2(x, y)` with
//! `theta = E h(X, Y)` for independent `X, Y ~ P` and
//! `h1(x) = E h(x, Y) - theta`. The remainder `h2` is degenerate:
//! `E h2(x, Y) = 0` for every fixed `x`. Population components are only
//! computed for finite discrete distributions, which keeps them exactly
//! enumerable; closed-form components for continuous processes live with
//! the experiment oracles.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math;

/// A symmetric, measurable map `(f64, f64) -> f64` with a name and optional
/// parameters.
#[derive(Clone)]
pub struct Kernel {
    name: &'static str,
    form: KernelForm,
}

#[derive(Clone)]
enum KernelForm {
    /// `h(x, y) = (x - y)^2 / 2`, the unbiased variance estimator kernel.
    Variance,
    /// `h(x, y) = 1 if |x - y| < t else 0` (strict inequality).
    Indicator { threshold: f64 },
    /// Arbitrary user-supplied symmetric map.
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.form {
            KernelForm::Variance => write!(f, "Kernel::variance"),
            KernelForm::Indicator { threshold } => {
                write!(f, "Kernel::indicator(t = {threshold})")
            }
            KernelForm::Custom(_) => write!(f, "Kernel::custom({})", self.name),
        }
    }
}

impl Kernel {
    /// The variance kernel `h(x, y) = (x - y)^2 / 2`. Its U-statistic is the
    /// unbiased sample variance.
    pub fn variance() -> Self {
        Kernel {
            name: "variance",
            form: KernelForm::Variance,
        }
    }

    /// The closeness indicator `h(x, y) = 1{|x - y| < t}` underlying
    /// correlation-dimension estimation. Boundary pairs with `|x - y| = t`
    /// count as 0.
    pub fn indicator(threshold: f64) -> Result<Self> {
        if !(threshold > 0.0) || !threshold.is_finite() {
            return Err(Error::InvalidParameter(
                "indicator threshold t must be positive",
            ));
        }
        Ok(Kernel {
            name: "indicator",
            form: KernelForm::Indicator { threshold },
        })
    }

    /// Wraps an arbitrary map. The caller is responsible for symmetry;
    /// [`check_symmetry`] spot-checks it.
    pub fn custom<F>(name: &'static str, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Kernel {
            name,
            form: KernelForm::Custom(Arc::new(f)),
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    /// Evaluates the kernel. Inputs are expected to be finite; sample
    /// constructors enforce this, so the O(n^2) loops stay check-free.
    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        debug_assert!(!x.is_nan() && !y.is_nan());
        match self.form {
            KernelForm::Variance => {
                let d = x - y;
                0.5 * d * d
            }
            KernelForm::Indicator { threshold } => {
                if math::abs(x - y) < threshold {
                    1.0
                } else {
                    0.0
                }
            }
            KernelForm::Custom(ref f) => f(x, y),
        }
    }

    /// Evaluates the kernel, rejecting NaN inputs instead of propagating
    /// them.
    pub fn eval_checked(&self, x: f64, y: f64) -> Result<f64> {
        if x.is_nan() || y.is_nan() {
            return Err(Error::NonFiniteInput);
        }
        Ok(self.eval(x, y))
    }

    /// True for the variance kernel, whose pair sums collapse to moment
    /// sums; resampling and reference draws use this as a fast path.
    pub(crate) fn is_variance(&self) -> bool {
        matches!(self.form, KernelForm::Variance)
    }
}

/// Checks `|h(x, y) - h(y, x)| <= tol` on every supplied pair.
pub fn check_symmetry(kernel: &Kernel, points: &[(f64, f64)], tol: f64) -> bool {
    debug_assert!(tol > 0.0);
    points
        .iter()
        .all(|&(x, y)| math::abs(kernel.eval(x, y) - kernel.eval(y, x)) <= tol)
}

/// A finite discrete distribution, the substrate for brute-force component
/// checks.
#[derive(Clone, Debug)]
pub struct DiscreteDistribution {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    /// Validates that the support points are finite and distinct and the
    /// probabilities are nonnegative and sum to 1 within 1e-12.
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptyInput);
        }
        if support.len() != probs.len() {
            return Err(Error::InvalidConfig(
                "support and probability lengths differ",
            ));
        }
        if support.iter().any(|v| !v.is_finite()) || probs.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        if probs.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidConfig("negative probability"));
        }
        if math::abs(math::sum(&probs) - 1.0) > 1e-12 {
            return Err(Error::InvalidConfig("probabilities do not sum to 1"));
        }
        for (i, &x) in support.iter().enumerate() {
            if support[..i].contains(&x) {
                return Err(Error::InvalidConfig("support values are not distinct"));
            }
        }
        Ok(DiscreteDistribution { support, probs })
    }

    /// The distribution putting all mass on `c`.
    pub fn point_mass(c: f64) -> Result<Self> {
        Self::new(alloc::vec![c], alloc::vec![1.0])
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

/// Population Hoeffding components of a kernel on a finite distribution,
/// stored as tables indexed like the support.
#[derive(Clone, Debug)]
pub struct PopulationComponents {
    support: Vec<f64>,
    theta: f64,
    h1: Vec<f64>,
    /// Row-major `k x k` table of `h2` values.
    h2: Vec<f64>,
}

impl PopulationComponents {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    /// `h1` at support index `i`.
    pub fn h1_at(&self, i: usize) -> f64 {
        self.h1[i]
    }

    /// `h2` at support indices `(i, j)`.
    pub fn h2_at(&self, i: usize, j: usize) -> f64 {
        self.h2[i * self.support.len() + j]
    }

    /// Looks up a support value by exact equality. Intended for discrete
    /// chains whose states are exact floats.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        self.support.iter().position(|&v| v == x)
    }
}

/// Computes `theta`, `h1` and `h2` by full enumeration of the support.
pub fn population_components(kernel: &Kernel, dist: &DiscreteDistribution) -> PopulationComponents {
    let support = dist.support();
    let probs = dist.probs();
    let k = support.len();

    // theta = sum_{x,y} P(x) P(y) h(x,y)
    let mut theta_acc = math::KahanSum::new();
    for (i, &x) in support.iter().enumerate() {
        for (j, &y) in support.iter().enumerate() {
            theta_acc.add(probs[i] * probs[j] * kernel.eval(x, y));
        }
    }
    let theta = theta_acc.total();

    // h1(x) = E h(x, Y) - theta
    let mut h1 = Vec::with_capacity(k);
    for &x in support {
        let mut row = math::KahanSum::new();
        for (j, &y) in support.iter().enumerate() {
            row.add(probs[j] * kernel.eval(x, y));
        }
        h1.push(row.total() - theta);
    }

    // h2(x, y) = h(x, y) - h1(x) - h1(y) - theta
    let mut h2 = Vec::with_capacity(k * k);
    for (i, &x) in support.iter().enumerate() {
        for (j, &y) in support.iter().enumerate() {
            h2.push(kernel.eval(x, y) - h1[i] - h1[j] - theta);
        }
    }

    PopulationComponents {
        support: support.to_vec(),
        theta,
        h1,
        h2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn variance_kernel_values() {
        let k = Kernel::variance();
        assert_eq!(k.eval(2.0, 0.0), 2.0);
        assert_eq!(k.eval(3.5, 3.5), 0.0);
        assert_eq!(k.eval(-1.0, -1.0), 0.0);
        assert_eq!(k.eval(1.0, 3.0), 2.0);
        assert_eq!(k.eval(3.0, 1.0), 2.0);
    }

    #[test]
    fn indicator_kernel_strict_boundary() {
        let k = Kernel::indicator(1.0).unwrap();
        assert_eq!(k.eval(0.0, 0.5), 1.0);
        // |x - y| = t is excluded.
        assert_eq!(k.eval(0.0, 1.0), 0.0);
        let k2 = Kernel::indicator(2.0).unwrap();
        assert_eq!(k2.eval(5.0, 3.5), 1.0);
    }

    #[test]
    fn indicator_rejects_nonpositive_threshold() {
        assert!(matches!(
            Kernel::indicator(0.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            Kernel::indicator(-1.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            Kernel::indicator(f64::NAN),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn eval_checked_rejects_nan() {
        let k = Kernel::variance();
        assert_eq!(k.eval_checked(f64::NAN, 0.0), Err(Error::NonFiniteInput));
        assert_eq!(k.eval_checked(0.0, f64::NAN), Err(Error::NonFiniteInput));
        assert_eq!(k.eval_checked(1.0, 3.0), Ok(2.0));
    }

    #[test]
    fn symmetry_check_accepts_builtins_and_flags_asymmetric_maps() {
        let grid: Vec<(f64, f64)> = (-3..=3)
            .flat_map(|i| (-3..=3).map(move |j| (i as f64 * 0.7, j as f64 * 0.3)))
            .collect();
        assert!(check_symmetry(&Kernel::variance(), &grid, 1e-12));
        assert!(check_symmetry(
            &Kernel::indicator(1.0).unwrap(),
            &grid,
            1e-12
        ));

        let asymmetric = Kernel::custom("first-coordinate", |x, _| x);
        assert!(!check_symmetry(&asymmetric, &[(0.0, 1.0)], 1e-12));
    }

    #[test]
    fn components_of_variance_kernel_on_two_points() {
        // Support {0, 2} with probability 1/2 each: enumerating the four
        // pairs gives theta = 1 and a vanishing linear part.
        let d = DiscreteDistribution::new(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        let pc = population_components(&Kernel::variance(), &d);
        assert!((pc.theta() - 1.0).abs() < 1e-12);
        assert!(pc.h1_at(0).abs() < 1e-12);
        assert!(pc.h1_at(1).abs() < 1e-12);
    }

    #[test]
    fn components_of_point_mass_vanish() {
        let d = DiscreteDistribution::point_mass(3.25).unwrap();
        let pc = population_components(&Kernel::variance(), &d);
        assert_eq!(pc.theta(), 0.0);
        assert_eq!(pc.h1_at(0), 0.0);
        assert_eq!(pc.h2_at(0, 0), 0.0);
    }

    #[test]
    fn components_of_indicator_on_separated_points() {
        // Only the diagonal pairs are within t = 1 of each other.
        let d = DiscreteDistribution::new(vec![0.0, 5.0], vec![0.5, 0.5]).unwrap();
        let pc = population_components(&Kernel::indicator(1.0).unwrap(), &d);
        assert!((pc.theta() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn distribution_validation() {
        assert!(matches!(
            DiscreteDistribution::new(vec![0.0, 1.0], vec![0.6, 0.6]),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            DiscreteDistribution::new(vec![1.0, 1.0], vec![0.5, 0.5]),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            DiscreteDistribution::new(vec![], vec![]),
            Err(Error::EmptyInput)
        ));
        assert!(matches!(
            DiscreteDistribution::new(vec![0.0], vec![f64::NAN]),
            Err(Error::NonFiniteInput)
        ));
    }

    fn assert_component_invariants(kernel: &Kernel, d: &DiscreteDistribution) {
        let pc = population_components(kernel, d);
        let k = d.len();
        // Centering: sum_x P(x) h1(x) = 0.
        let mut lin = math::KahanSum::new();
        for i in 0..k {
            lin.add(d.probs()[i] * pc.h1_at(i));
        }
        assert!(lin.total().abs() < 1e-12);
        // Degeneracy and pointwise reconstruction.
        for i in 0..k {
            let mut row = math::KahanSum::new();
            for j in 0..k {
                row.add(d.probs()[j] * pc.h2_at(i, j));
                let recon = pc.theta() + pc.h1_at(i) + pc.h1_at(j) + pc.h2_at(i, j);
                let h = kernel.eval(d.support()[i], d.support()[j]);
                assert!((recon - h).abs() < 1e-12);
            }
            assert!(row.total().abs() < 1e-12);
        }
    }

    #[test]
    fn component_invariants_on_fixed_distributions() {
        let d = DiscreteDistribution::new(
            vec![-1.5, 0.0, 0.25, 2.0, 7.5],
            vec![0.1, 0.3, 0.25, 0.2, 0.15],
        )
        .unwrap();
        assert_component_invariants(&Kernel::variance(), &d);
        assert_component_invariants(&Kernel::indicator(1.5).unwrap(), &d);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn distribution_strategy() -> impl Strategy<Value = DiscreteDistribution> {
            (
                proptest::collection::vec(-10.0f64..10.0, 5),
                proptest::collection::vec(0.05f64..1.0, 5),
            )
                .prop_filter_map("distinct support", |(mut support, weights)| {
                    support.sort_by(f64::total_cmp);
                    support.dedup();
                    if support.len() != 5 {
                        return None;
                    }
                    let total: f64 = weights.iter().sum();
                    let probs: alloc::vec::Vec<f64> = weights.iter().map(|w| w / total).collect();
                    DiscreteDistribution::new(support, probs).ok()
                })
        }

        proptest! {
            #[test]
            fn reconstruction_and_degeneracy_hold(d in distribution_strategy(), t in 0.1f64..5.0) {
                assert_component_invariants(&Kernel::variance(), &d);
                assert_component_invariants(&Kernel::indicator(t).unwrap(), &d);
            }
        }
    }
}
