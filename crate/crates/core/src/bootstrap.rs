//! Percentile bootstrap: resampling, the tie-aware sign-count p-value and
//! percentile confidence intervals.
//!
//! Replicate `b` resamples cell `c` from the stream addressed by
//! `(seed, "bootstrap", b, c)`. Replicates can therefore run in any order on
//! any number of threads and still produce bitwise identical distributions.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantile::{Estimator, QuantileLevel};
use crate::rng::{RngStream, StreamRng};

pub const DEFAULT_NBOOT: usize = 2000;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_SEED: u64 = 2023;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    /// Number of bootstrap replicates `B`.
    pub nboot: usize,
    pub alpha: f64,
    pub seed: u64,
    pub estimator: Estimator,
    pub quantiles: Vec<QuantileLevel>,
    /// One set of cell resamples serves every quantile. Only `true` is supported.
    pub shared_samples: bool,
    /// Evaluate replicates on the rayon pool. Output does not depend on it.
    pub parallel: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            nboot: DEFAULT_NBOOT,
            alpha: DEFAULT_ALPHA,
            seed: DEFAULT_SEED,
            estimator: Estimator::HarrellDavis,
            quantiles: QuantileLevel::deciles(),
            shared_samples: true,
            parallel: true,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!(
                "alpha {} is outside (0, 1)",
                self.alpha
            )));
        }
        if (self.nboot as f64) * self.alpha < 2.0 || ci_trim(self.nboot, self.alpha) < 1 {
            return Err(Error::invalid(format!(
                "nboot = {} is too small for alpha = {}; need nboot >= {}",
                self.nboot,
                self.alpha,
                (2.0 / self.alpha).ceil()
            )));
        }
        if self.quantiles.is_empty() {
            return Err(Error::invalid("quantile family is empty"));
        }
        if self.quantiles.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "quantile levels must be strictly increasing",
            ));
        }
        if !self.shared_samples {
            return Err(Error::invalid(
                "separate bootstrap samples per quantile are not supported",
            ));
        }
        Ok(())
    }
}

/// Sorted replicate statistics `Ψ*_(1) <= ... <= Ψ*_(B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapDistribution(Vec<f64>);

impl BootstrapDistribution {
    pub fn from_replicates(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("bootstrap distribution is empty"));
        }
        if let Some(replicate) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { replicate });
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(BootstrapDistribution(values))
    }

    pub fn sorted(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `(#{Ψ* < 0}, #{Ψ* = 0})`
    pub fn sign_counts(&self) -> (usize, usize) {
        let below = self.0.partition_point(|&v| v < 0.0);
        let at_or_below = self.0.partition_point(|&v| v <= 0.0);
        (below, at_or_below - below)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub p_value: f64,
}

impl InferenceResult {
    pub fn from_distribution(
        estimate: f64,
        dist: &BootstrapDistribution,
        alpha: f64,
    ) -> Result<Self> {
        let (ci_low, ci_high) = percentile_ci(dist, alpha)?;
        Ok(InferenceResult {
            estimate,
            ci_low,
            ci_high,
            p_value: signed_pvalue(dist),
        })
    }
}

/// Draws `sample.len()` values uniformly with replacement.
pub fn resample<R: Rng + ?Sized>(sample: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(sample.len());
    resample_into(sample, rng, &mut out)?;
    Ok(out)
}

pub fn resample_into<R: Rng + ?Sized>(
    sample: &[f64],
    rng: &mut R,
    out: &mut Vec<f64>,
) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::invalid("cannot resample an empty sample"));
    }
    let n = sample.len();
    out.clear();
    out.extend((0..n).map(|_| sample[rng.random_range(0..n)]));
    Ok(())
}

/// `2 min(P, 1 - P)` with `P = A/B + D/(2B)`.
pub fn signed_pvalue(dist: &BootstrapDistribution) -> f64 {
    let (below, ties) = dist.sign_counts();
    let b = dist.len() as f64;
    let p = (2 * below + ties) as f64 / (2.0 * b);
    (2.0 * p.min(1.0 - p)).clamp(0.0, 1.0)
}

/// `ℓ = round(αB/2)`, ties to even.
pub fn ci_trim(nboot: usize, alpha: f64) -> usize {
    (alpha * nboot as f64 / 2.0).round_ties_even() as usize
}

/// `(Ψ*_(ℓ+1), Ψ*_(B-ℓ))` in 1-based order-statistic notation.
pub fn percentile_ci(dist: &BootstrapDistribution, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha {alpha} is outside (0, 1)")));
    }
    let b = dist.len();
    let trim = ci_trim(b, alpha);
    if trim < 1 || 2 * trim >= b {
        return Err(Error::invalid(format!(
            "{b} replicates are too few for a {}% interval",
            100.0 * (1.0 - alpha)
        )));
    }
    let upper = b - trim;
    Ok((dist.0[trim], dist.0[upper - 1]))
}

/// A statistic evaluated on every bootstrap replicate of a set of cells.
///
/// `evaluate` receives freshly resampled cells (which it may reorder in place)
/// and writes `width()` values into `out`.
pub trait ReplicateStatistic: Sync {
    type Scratch: Send;

    fn width(&self) -> usize;

    fn scratch(&self) -> Self::Scratch;

    fn evaluate(
        &self,
        cells: &mut [Vec<f64>],
        scratch: &mut Self::Scratch,
        out: &mut [f64],
    ) -> Result<()>;
}

/// Adapter turning a closure into a [`ReplicateStatistic`].
pub struct FnStatistic<F> {
    width: usize,
    f: F,
}

pub fn statistic_fn<F>(width: usize, f: F) -> FnStatistic<F>
where
    F: Fn(&mut [Vec<f64>], &mut [f64]) + Sync,
{
    FnStatistic { width, f }
}

impl<F> ReplicateStatistic for FnStatistic<F>
where
    F: Fn(&mut [Vec<f64>], &mut [f64]) + Sync,
{
    type Scratch = ();

    fn width(&self) -> usize {
        self.width
    }

    fn scratch(&self) {}

    fn evaluate(&self, cells: &mut [Vec<f64>], _: &mut (), out: &mut [f64]) -> Result<()> {
        (self.f)(cells, out);
        Ok(())
    }
}

struct Worker<S> {
    cells: Vec<Vec<f64>>,
    scratch: S,
}

fn run_replicate<S: ReplicateStatistic>(
    cells: &[&[f64]],
    statistic: &S,
    root: RngStream,
    b: usize,
    worker: &mut Worker<S::Scratch>,
) -> Result<Vec<f64>> {
    let stream = root.index(b as u64);
    for (c, (src, dst)) in cells.iter().zip(worker.cells.iter_mut()).enumerate() {
        let mut rng: StreamRng = stream.index(c as u64).rng();
        resample_into(src, &mut rng, dst)?;
    }
    let mut out = vec![0.0; statistic.width()];
    statistic.evaluate(&mut worker.cells, &mut worker.scratch, &mut out)?;
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { replicate: b });
    }
    Ok(out)
}

/// Evaluates `statistic` on `config.nboot` independent resamplings of `cells`.
///
/// Returns one sorted distribution per output column of the statistic.
pub fn bootstrap_statistic<S: ReplicateStatistic>(
    cells: &[&[f64]],
    statistic: &S,
    config: &BootstrapConfig,
) -> Result<Vec<BootstrapDistribution>> {
    config.validate()?;
    if cells.is_empty() {
        return Err(Error::invalid("no cells to resample"));
    }
    if let Some(c) = cells.iter().position(|c| c.is_empty()) {
        return Err(Error::invalid(format!("cell {c} is empty")));
    }
    let root = RngStream::new(config.seed).tagged("bootstrap");
    let new_worker = || Worker {
        cells: cells.iter().map(|c| Vec::with_capacity(c.len())).collect(),
        scratch: statistic.scratch(),
    };

    let rows: Vec<Vec<f64>> = if config.parallel {
        (0..config.nboot)
            .into_par_iter()
            .map_init(new_worker, |w, b| {
                run_replicate(cells, statistic, root, b, w)
            })
            .collect::<Result<_>>()?
    } else {
        let mut w = new_worker();
        (0..config.nboot)
            .map(|b| run_replicate(cells, statistic, root, b, &mut w))
            .collect::<Result<_>>()?
    };

    (0..statistic.width())
        .map(|k| BootstrapDistribution::from_replicates(rows.iter().map(|r| r[k]).collect()))
        .collect()
}
