//! Block bootstrap resampling of a series and the bootstrap distribution of
//! a U-statistic.
//!
//! The sample is cut into blocks of `l` consecutive observations and a
//! resample concatenates `b = floor(n / l)` independently drawn blocks.
//! Block starts are uniform over all `n` positions with periodic wrapping
//! (circular), over the `n - l + 1` full windows (moving), or over the
//! `floor(n / l)` aligned offsets (non-overlapping). The bootstrapped
//! statistic is
//!
//! ```text
//! U*(h) = 2 / (bl (bl - 1)) * sum_{i < j} h(X*_i, X*_j)
//! ```
//!
//! and its distribution is summarized by replicates of
//! `sqrt(bl) (U* - E*[U*])`. For the circular scheme the conditional
//! expectation `E*[U*]` has a closed form: every within-block pair at lag
//! `d` averages the circular lag-`d` kernel mean, and every cross-block
//! pair averages the V-statistic of the sample.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::math::{self, KahanSum};
use crate::procgen::RngStream;
use crate::ustat::{u_statistic, v_statistic, Sample};

/// Which family of block starts a resample draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    /// Periodic extension, starts uniform over all `n` positions.
    Circular,
    /// Starts uniform over the `n - l + 1` complete windows.
    Moving,
    /// Starts uniform over the aligned offsets `0, l, 2l, ...`.
    NonOverlapping,
}

impl SchemeKind {
    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::Circular => "circular",
            SchemeKind::Moving => "moving",
            SchemeKind::NonOverlapping => "nonoverlapping",
        }
    }
}

/// A block resampling scheme: the variant plus the block length `l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockScheme {
    pub kind: SchemeKind,
    pub block_length: usize,
}

impl BlockScheme {
    pub fn circular(block_length: usize) -> Self {
        BlockScheme {
            kind: SchemeKind::Circular,
            block_length,
        }
    }

    pub fn moving(block_length: usize) -> Self {
        BlockScheme {
            kind: SchemeKind::Moving,
            block_length,
        }
    }

    pub fn non_overlapping(block_length: usize) -> Self {
        BlockScheme {
            kind: SchemeKind::NonOverlapping,
            block_length,
        }
    }

    /// `1 <= l <= n`.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        if self.block_length == 0 || self.block_length > n {
            return Err(Error::InvalidBlockLength {
                block_length: self.block_length,
                limit: n,
            });
        }
        Ok(())
    }

    /// `b = floor(n / l)` blocks per resample.
    pub fn block_count(&self, n: usize) -> usize {
        n / self.block_length
    }

    /// Resample length `b * l <= n`.
    pub fn resample_len(&self, n: usize) -> usize {
        self.block_count(n) * self.block_length
    }

    /// Number of admissible start positions.
    fn start_choices(&self, n: usize) -> usize {
        match self.kind {
            SchemeKind::Circular => n,
            SchemeKind::Moving => n - self.block_length + 1,
            SchemeKind::NonOverlapping => n / self.block_length,
        }
    }

    /// Maps a uniform choice index to a start position.
    fn choice_to_start(&self, choice: usize) -> usize {
        match self.kind {
            SchemeKind::Circular | SchemeKind::Moving => choice,
            SchemeKind::NonOverlapping => choice * self.block_length,
        }
    }

    fn start_is_valid(&self, start: usize, n: usize) -> bool {
        match self.kind {
            SchemeKind::Circular => start < n,
            SchemeKind::Moving => start + self.block_length <= n,
            SchemeKind::NonOverlapping => {
                start % self.block_length == 0 && start + self.block_length <= n
            }
        }
    }
}

/// Draws the `b` iid uniform block starts of one resample.
pub fn draw_block_starts(n: usize, scheme: BlockScheme, rng: &mut RngStream) -> Result<Vec<usize>> {
    scheme.validate_for(n)?;
    let b = scheme.block_count(n);
    let choices = scheme.start_choices(n) as u64;
    Ok((0..b)
        .map(|_| scheme.choice_to_start(rng.next_below(choices) as usize))
        .collect())
}

/// Index form of one resample: `b` blocks of `l` consecutive positions,
/// wrapped modulo `n` under the circular scheme.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BootstrapSample {
    indices: Vec<usize>,
}

impl BootstrapSample {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Gathers the resampled values out of the original series.
    pub fn values(&self, sample: &Sample) -> Result<Sample> {
        let v = sample.values();
        if self.indices.iter().any(|&i| i >= v.len()) {
            return Err(Error::InvalidConfig("bootstrap indices exceed the sample"));
        }
        Sample::new(self.indices.iter().map(|&i| v[i]).collect())
    }
}

/// Concatenates the blocks at the given starts into index form.
pub fn materialize(
    sample: &Sample,
    starts: &[usize],
    block_length: usize,
    kind: SchemeKind,
) -> Result<BootstrapSample> {
    let n = sample.len();
    let scheme = BlockScheme { kind, block_length };
    scheme.validate_for(n)?;
    if starts.iter().any(|&s| !scheme.start_is_valid(s, n)) {
        return Err(Error::InvalidConfig(
            "block start is invalid for the scheme",
        ));
    }
    let mut indices = Vec::with_capacity(starts.len() * block_length);
    for &start in starts {
        for offset in 0..block_length {
            indices.push(match kind {
                SchemeKind::Circular => (start + offset) % n,
                _ => start + offset,
            });
        }
    }
    Ok(BootstrapSample { indices })
}

/// One draw of `U*(h)`, computed by `u_statistic` over the materialized
/// resample.
pub fn bootstrap_replicate(
    kernel: &Kernel,
    sample: &Sample,
    scheme: BlockScheme,
    rng: &mut RngStream,
) -> Result<f64> {
    scheme.validate_for(sample.len())?;
    let bl = scheme.resample_len(sample.len());
    if bl < 2 {
        return Err(Error::InsufficientData { needed: 2, got: bl });
    }
    let starts = draw_block_starts(sample.len(), scheme, rng)?;
    let resample = materialize(sample, &starts, scheme.block_length, scheme.kind)?;
    u_statistic(kernel, &resample.values(sample)?)
}

/// How the distribution is centered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CenterPolicy {
    /// Use the closed-form `E*[U*]` where available (circular); falls back
    /// to the Monte Carlo mean otherwise, flagged on the result.
    Exact,
    /// Center at the Monte Carlo mean of the raw replicates.
    MonteCarlo,
}

/// Which center a [`BootstrapDistribution`] actually carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CenterKind {
    Exact,
    MonteCarlo,
}

/// Monte Carlo draws of `sqrt(bl) (U* - center)`.
#[derive(Clone, Debug)]
pub struct BootstrapDistribution {
    replicates: Vec<f64>,
    center: f64,
    center_kind: CenterKind,
    scale: f64,
}

impl BootstrapDistribution {
    /// Assembles a distribution from already centered and scaled
    /// replicates. Mostly useful in tests and for (de)serialization.
    pub fn from_parts(
        replicates: Vec<f64>,
        center: f64,
        center_kind: CenterKind,
        scale: f64,
    ) -> Result<Self> {
        if replicates.is_empty() {
            return Err(Error::InsufficientReplicates { needed: 1, got: 0 });
        }
        if replicates.iter().any(|r| !r.is_finite()) || !center.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        if !(scale > 0.0) {
            return Err(Error::InvalidScale);
        }
        Ok(BootstrapDistribution {
            replicates,
            center,
            center_kind,
            scale,
        })
    }

    /// Centered, `sqrt(bl)`-scaled replicates.
    pub fn replicates(&self) -> &[f64] {
        &self.replicates
    }

    /// The `E*[U*]` estimate the replicates are centered at.
    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn center_kind(&self) -> CenterKind {
        self.center_kind
    }

    /// `sqrt(bl)`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.replicates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replicates.is_empty()
    }
}

/// Draws `b_reps` independent replicates of `sqrt(bl) (U* - E*[U*])`, one
/// RNG substream per replicate.
pub fn bootstrap_distribution(
    kernel: &Kernel,
    sample: &Sample,
    scheme: BlockScheme,
    b_reps: usize,
    policy: CenterPolicy,
    rng: &RngStream,
) -> Result<BootstrapDistribution> {
    if b_reps == 0 {
        return Err(Error::InsufficientReplicates { needed: 1, got: 0 });
    }
    scheme.validate_for(sample.len())?;
    let n = sample.len();
    let bl = scheme.resample_len(n);
    if bl < 2 {
        return Err(Error::InsufficientData { needed: 2, got: bl });
    }

    let engine = ReplicateEngine::new(kernel, sample, scheme);
    let mut raw = Vec::with_capacity(b_reps);
    for rep in 0..b_reps {
        let mut sub = rng.child(rep as u64);
        let starts = draw_block_starts(n, scheme, &mut sub)?;
        raw.push(engine.replicate_from_starts(&starts));
    }

    let (center, center_kind) = match (policy, scheme.kind) {
        (CenterPolicy::Exact, SchemeKind::Circular) => (
            exact_bootstrap_expectation(kernel, sample, scheme)?,
            CenterKind::Exact,
        ),
        _ => (math::mean(&raw), CenterKind::MonteCarlo),
    };

    let scale = math::sqrt(bl as f64);
    let replicates = raw.iter().map(|&u| scale * (u - center)).collect();
    Ok(BootstrapDistribution {
        replicates,
        center,
        center_kind,
        scale,
    })
}

/// Sample variance (divisor `B - 1`) of the centered, scaled replicates.
pub fn bootstrap_variance(dist: &BootstrapDistribution) -> Result<f64> {
    if dist.len() < 2 {
        return Err(Error::InsufficientReplicates {
            needed: 2,
            got: dist.len(),
        });
    }
    Ok(math::sample_variance(dist.replicates()))
}

/// Closed-form `E*[U*]` under the circular scheme.
///
/// A within-block pair at lag `d` has expectation
/// `C_d = (1/n) sum_j h(X_j, X_{j+d})` (circular indexing), each block
/// contributes `l - d` pairs at lag `d`, and every cross-block pair has
/// expectation `V_n`. Other schemes have no closed form here and report an
/// error; [`bootstrap_distribution`] falls back to Monte Carlo centering
/// for them.
pub fn exact_bootstrap_expectation(
    kernel: &Kernel,
    sample: &Sample,
    scheme: BlockScheme,
) -> Result<f64> {
    scheme.validate_for(sample.len())?;
    if scheme.kind != SchemeKind::Circular {
        return Err(Error::InvalidConfig(
            "exact bootstrap expectation is available for the circular scheme only",
        ));
    }
    let n = sample.len();
    let l = scheme.block_length;
    let b = scheme.block_count(n);
    let bl = b * l;
    if bl < 2 {
        return Err(Error::InsufficientData { needed: 2, got: bl });
    }
    let v = sample.values();

    // Within-block pair sum per block: sum_{d=1}^{l-1} (l - d) C_d.
    let mut within_per_block = KahanSum::new();
    for d in 1..l {
        let mut lag = KahanSum::new();
        for j in 0..n {
            lag.add(kernel.eval(v[j], v[(j + d) % n]));
        }
        within_per_block.add((l - d) as f64 * lag.total() / n as f64);
    }

    let v_stat = if kernel.is_variance() {
        // V of the variance kernel is the population variance.
        let m = math::mean(v);
        let mut acc = KahanSum::new();
        for &x in v {
            acc.add((x - m) * (x - m));
        }
        acc.total() / n as f64
    } else {
        v_statistic(kernel, sample)?
    };

    let total_pairs = bl as f64 * (bl - 1) as f64 / 2.0;
    let within_pairs = b as f64 * (l * (l - 1) / 2) as f64;
    let cross_pairs = total_pairs - within_pairs;
    Ok((b as f64 * within_per_block.total() + cross_pairs * v_stat) / total_pairs)
}

/// Precomputed per-start block statistics that turn one replicate into an
/// O(b) or O(b^2) combination instead of O((bl)^2) kernel evaluations.
///
/// The variance kernel collapses to per-block sums of values and squares.
/// Any other kernel uses a within-block pair sum per start plus an
/// all-starts cross table, built once per (kernel, sample, scheme); above
/// the memory cutoff it falls back to direct evaluation.
pub(crate) struct ReplicateEngine<'a> {
    kernel: &'a Kernel,
    sample: &'a Sample,
    scheme: BlockScheme,
    body: EngineBody,
}

enum EngineBody {
    VarianceSums {
        block_sum: Vec<f64>,
        block_sq_sum: Vec<f64>,
    },
    PairTables {
        within: Vec<f64>,
        cross: Vec<f64>,
        n: usize,
    },
    Direct,
}

/// Above this series length the n x n cross table is not worth its memory.
const PAIR_TABLE_MAX_N: usize = 2048;

impl<'a> ReplicateEngine<'a> {
    pub(crate) fn new(kernel: &'a Kernel, sample: &'a Sample, scheme: BlockScheme) -> Self {
        debug_assert!(scheme.validate_for(sample.len()).is_ok());
        let n = sample.len();
        let l = scheme.block_length;
        let v = sample.values();

        let body = if kernel.is_variance() {
            // (x - y)^2 is translation invariant; centering first keeps the
            // moment sums small.
            let m = math::mean(v);
            let mut block_sum = Vec::with_capacity(n);
            let mut block_sq_sum = Vec::with_capacity(n);
            for j in 0..n {
                let mut s = 0.0;
                let mut sq = 0.0;
                for offset in 0..l {
                    let y = v[(j + offset) % n] - m;
                    s += y;
                    sq += y * y;
                }
                block_sum.push(s);
                block_sq_sum.push(sq);
            }
            EngineBody::VarianceSums {
                block_sum,
                block_sq_sum,
            }
        } else if n <= PAIR_TABLE_MAX_N {
            let mut within = Vec::with_capacity(n);
            for j in 0..n {
                let mut acc = KahanSum::new();
                for s in 0..l {
                    for t in s + 1..l {
                        acc.add(kernel.eval(v[(j + s) % n], v[(j + t) % n]));
                    }
                }
                within.push(acc.total());
            }
            let mut cross = alloc::vec![0.0; n * n];
            for j in 0..n {
                for jp in j..n {
                    let mut acc = KahanSum::new();
                    for s in 0..l {
                        for t in 0..l {
                            acc.add(kernel.eval(v[(j + s) % n], v[(jp + t) % n]));
                        }
                    }
                    let g = acc.total();
                    cross[j * n + jp] = g;
                    cross[jp * n + j] = g;
                }
            }
            EngineBody::PairTables { within, cross, n }
        } else {
            EngineBody::Direct
        };

        ReplicateEngine {
            kernel,
            sample,
            scheme,
            body,
        }
    }

    pub(crate) fn replicate_from_starts(&self, starts: &[usize]) -> f64 {
        let l = self.scheme.block_length;
        let bl = starts.len() * l;
        let pairs = bl as f64 * (bl - 1) as f64 / 2.0;
        match &self.body {
            EngineBody::VarianceSums {
                block_sum,
                block_sq_sum,
            } => {
                let mut s = 0.0;
                let mut sq = 0.0;
                for &j in starts {
                    s += block_sum[j];
                    sq += block_sq_sum[j];
                }
                (bl as f64 * sq - s * s) / (bl as f64 * (bl - 1) as f64)
            }
            EngineBody::PairTables { within, cross, n } => {
                let mut acc = KahanSum::new();
                for (k, &j) in starts.iter().enumerate() {
                    acc.add(within[j]);
                    for &jp in &starts[k + 1..] {
                        acc.add(cross[j * n + jp]);
                    }
                }
                acc.total() / pairs
            }
            EngineBody::Direct => {
                let resample = materialize(self.sample, starts, l, self.scheme.kind)
                    .expect("starts drawn for this scheme");
                let values = resample.values(self.sample).expect("indices in range");
                u_statistic(self.kernel, &values).expect("bl >= 2")
            }
        }
    }
}
