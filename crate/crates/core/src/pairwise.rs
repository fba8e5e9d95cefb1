//! Quantiles of all-pairwise-difference distributions.
//!
//! For each level of factor A the two B cells are compared through every
//! difference `X_i - Y_h`. The interaction test compares the quantiles of the
//! level-1 and level-2 difference distributions. Unlike the decile contrast,
//! this depends on which factor is treated as A.

use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_statistic, BootstrapConfig, InferenceResult, ReplicateStatistic};
use crate::contrast::{build_rows, FactorialSample, QuantileTestRow};
use crate::error::{Error, Result};
use crate::multcomp::CorrectionMethod;
use crate::quantile::{QuantileLevel, QuantilePlan};

/// All `n1 * n2` differences, row-major over `(i, h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseDiffs {
    d: Vec<f64>,
    n1: usize,
    n2: usize,
}

impl PairwiseDiffs {
    pub fn as_slice(&self) -> &[f64] {
        &self.d
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.d
    }
}

pub fn pairwise_differences(x: &[f64], y: &[f64]) -> Result<PairwiseDiffs> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::invalid(
            "pairwise differences need two non-empty samples",
        ));
    }
    let d = x
        .iter()
        .flat_map(|&xi| y.iter().map(move |&yh| xi - yh))
        .collect();
    Ok(PairwiseDiffs {
        d,
        n1: x.len(),
        n2: y.len(),
    })
}

/// Estimate of `P(X < Y)`: the share of strictly negative differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhEstimate(pub f64);

pub fn ph_probability(diffs: &PairwiseDiffs) -> PhEstimate {
    let neg = diffs.d.iter().filter(|&&v| v < 0.0).count();
    PhEstimate(neg as f64 / diffs.d.len() as f64)
}

/// `P(X < Y)` estimates at each level of factor A: `(A1B1 vs A1B2, A2B1 vs A2B2)`.
pub fn ph_by_level(data: &FactorialSample) -> Result<(PhEstimate, PhEstimate)> {
    let [c11, c12, c21, c22] = data.flat();
    Ok((
        ph_probability(&pairwise_differences(c11, c12)?),
        ph_probability(&pairwise_differences(c21, c22)?),
    ))
}

/// Fills `out` with the sorted differences of two ascending samples.
///
/// Each row `x_i - y[..]` is written in ascending order, so the buffer is a
/// concatenation of sorted runs which the stable sort merges cheaply.
fn sorted_differences_into(x_sorted: &[f64], y_sorted: &[f64], out: &mut Vec<f64>) {
    out.clear();
    for &xi in x_sorted {
        out.extend(y_sorted.iter().rev().map(|&yh| xi - yh));
    }
    out.sort_by(f64::total_cmp);
}

#[derive(Default)]
struct DiffScratch {
    level1: Vec<f64>,
    level2: Vec<f64>,
    q1: Vec<f64>,
    q2: Vec<f64>,
}

struct IbandStatistic<'a> {
    plan: &'a QuantilePlan,
}

impl IbandStatistic<'_> {
    fn level_quantiles(&self, cells: &mut [Vec<f64>], s: &mut DiffScratch) -> Result<()> {
        for c in cells.iter_mut() {
            c.sort_unstable_by(f64::total_cmp);
        }
        sorted_differences_into(&cells[0], &cells[1], &mut s.level1);
        sorted_differences_into(&cells[2], &cells[3], &mut s.level2);
        self.plan.estimate_into(&s.level1, &mut s.q1)?;
        self.plan.estimate_into(&s.level2, &mut s.q2)
    }
}

impl ReplicateStatistic for IbandStatistic<'_> {
    type Scratch = DiffScratch;

    fn width(&self) -> usize {
        self.plan.levels().len()
    }

    fn scratch(&self) -> DiffScratch {
        DiffScratch {
            q1: vec![0.0; self.width()],
            q2: vec![0.0; self.width()],
            ..DiffScratch::default()
        }
    }

    fn evaluate(&self, cells: &mut [Vec<f64>], s: &mut DiffScratch, out: &mut [f64]) -> Result<()> {
        self.level_quantiles(cells, s)?;
        for ((o, a), b) in out.iter_mut().zip(&s.q1).zip(&s.q2) {
            *o = a - b;
        }
        Ok(())
    }
}

pub fn iband_plan(data: &FactorialSample, config: &BootstrapConfig) -> Result<QuantilePlan> {
    let [n11, n12, n21, n22] = data.sizes();
    QuantilePlan::new(config.estimator, &config.quantiles, [n11 * n12, n21 * n22])
}

/// Interaction test on quantiles of the two pairwise-difference distributions.
pub fn iband(
    data: &FactorialSample,
    config: &BootstrapConfig,
    correction: CorrectionMethod,
) -> Result<Vec<QuantileTestRow>> {
    config.validate()?;
    let plan = iband_plan(data, config)?;
    iband_with_plan(data, config, correction, &plan)
}

pub fn iband_with_plan(
    data: &FactorialSample,
    config: &BootstrapConfig,
    correction: CorrectionMethod,
    plan: &QuantilePlan,
) -> Result<Vec<QuantileTestRow>> {
    config.validate()?;
    if plan.levels() != config.quantiles.as_slice() || plan.estimator() != config.estimator {
        return Err(Error::invalid(
            "quantile plan does not match the bootstrap config",
        ));
    }
    data.warn_small_cells(&config.quantiles);

    let statistic = IbandStatistic { plan };
    let mut cells: Vec<Vec<f64>> = data.flat().iter().map(|c| c.to_vec()).collect();
    let mut s = statistic.scratch();
    statistic.level_quantiles(&mut cells, &mut s)?;

    let dists = bootstrap_statistic(&data.flat(), &statistic, config)
        .map_err(|e| e.context("pairwise-difference bootstrap"))?;

    let inference =
        s.q1.iter()
            .zip(&s.q2)
            .zip(&dists)
            .map(|((a, b), d)| InferenceResult::from_distribution(a - b, d, config.alpha))
            .collect::<Result<Vec<_>>>()?;
    let summaries: Vec<(f64, f64)> = s.q1.iter().copied().zip(s.q2.iter().copied()).collect();
    Ok(build_rows(
        &config.quantiles,
        &summaries,
        &inference,
        correction,
    ))
}

struct MedianDiffStatistic<'a> {
    plan: &'a QuantilePlan,
}

impl ReplicateStatistic for MedianDiffStatistic<'_> {
    type Scratch = Vec<f64>;

    fn width(&self) -> usize {
        1
    }

    fn scratch(&self) -> Vec<f64> {
        Vec::new()
    }

    fn evaluate(
        &self,
        cells: &mut [Vec<f64>],
        diffs: &mut Vec<f64>,
        out: &mut [f64],
    ) -> Result<()> {
        for c in cells.iter_mut() {
            c.sort_unstable_by(f64::total_cmp);
        }
        sorted_differences_into(&cells[0], &cells[1], diffs);
        self.plan.estimate_into(diffs, out)
    }
}

/// Percentile-bootstrap inference on the median of `X - Y` over all pairs.
///
/// Uses `config.estimator`; `config.quantiles` is ignored.
pub fn median_diff_test(x: &[f64], y: &[f64], config: &BootstrapConfig) -> Result<InferenceResult> {
    let config = BootstrapConfig {
        quantiles: vec![QuantileLevel::new(0.5)?],
        ..config.clone()
    };
    config.validate()?;
    let diffs = pairwise_differences(x, y)?;
    let plan = QuantilePlan::new(config.estimator, &config.quantiles, [diffs.d.len()])?;
    let mut sorted = diffs.into_inner();
    sorted.sort_unstable_by(f64::total_cmp);
    let estimate = plan.estimate(&sorted)?[0];

    let statistic = MedianDiffStatistic { plan: &plan };
    let dists = bootstrap_statistic(&[x, y], &statistic, &config)?;
    InferenceResult::from_distribution(estimate, &dists[0], config.alpha)
}
