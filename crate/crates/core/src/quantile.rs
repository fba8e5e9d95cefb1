//! Quantile estimators: Harrell-Davis and Hyndman-Fan definition 7.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::regularized_incomplete_beta;

/// A quantile level strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct QuantileLevel(f64);

impl QuantileLevel {
    pub fn new(q: f64) -> Result<Self> {
        if q > 0.0 && q < 1.0 {
            Ok(QuantileLevel(q))
        } else {
            Err(Error::invalid(format!(
                "quantile level {q} is outside the open interval (0, 1)"
            )))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// `.1, .2, ..., .9`
    pub fn deciles() -> Vec<QuantileLevel> {
        (1..=9).map(|k| QuantileLevel(k as f64 / 10.0)).collect()
    }

    /// `.1, .25, .5, .75, .9`
    pub fn quartiles_and_extremes() -> Vec<QuantileLevel> {
        [0.1, 0.25, 0.5, 0.75, 0.9]
            .into_iter()
            .map(QuantileLevel)
            .collect()
    }

    /// Validates a quantile family: non-empty and strictly increasing.
    pub fn family(levels: &[f64]) -> Result<Vec<QuantileLevel>> {
        if levels.is_empty() {
            return Err(Error::invalid("quantile family is empty"));
        }
        let family = levels
            .iter()
            .map(|&q| QuantileLevel::new(q))
            .collect::<Result<Vec<_>>>()?;
        if family.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::invalid(
                "quantile levels must be strictly increasing",
            ));
        }
        Ok(family)
    }
}

impl TryFrom<f64> for QuantileLevel {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        QuantileLevel::new(q)
    }
}

impl From<QuantileLevel> for f64 {
    fn from(q: QuantileLevel) -> f64 {
        q.0
    }
}

impl fmt::Display for QuantileLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Finite values in ascending order. Never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample(Vec<f64>);

impl SortedSample {
    /// Validates and sorts. NaN and infinities are rejected.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("sample is empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "sample value at position {i} is not finite ({})",
                values[i]
            )));
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(SortedSample(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> f64 {
        self.0[0]
    }

    pub fn max(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Which quantile estimator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    #[serde(alias = "hd")]
    HarrellDavis,
    #[serde(alias = "t7")]
    Type7,
}

impl Estimator {
    pub fn short_name(self) -> &'static str {
        match self {
            Estimator::HarrellDavis => "hd",
            Estimator::Type7 => "t7",
        }
    }
}

/// Harrell-Davis weights for one `(n, q)` pair.
///
/// `w[i] = P(i/n <= U <= (i+1)/n)` for `U ~ Beta((n+1)q, (n+1)(1-q))`.
#[derive(Debug, Clone, PartialEq)]
pub struct HdWeights(Vec<f64>);

impl HdWeights {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn hd_weights(n: usize, q: QuantileLevel) -> Result<HdWeights> {
    if n == 0 {
        return Err(Error::invalid("Harrell-Davis weights need n >= 1"));
    }
    let m = (n + 1) as f64;
    let a = m * q.get();
    let b = m * (1.0 - q.get());
    let nf = n as f64;

    let mut weights = Vec::with_capacity(n);
    let mut prev = 0.0;
    for i in 1..=n {
        let cdf = if i == n {
            1.0
        } else {
            regularized_incomplete_beta(i as f64 / nf, a, b)?
        };
        // CDF differences can round a hair below zero in the far tails
        weights.push((cdf - prev).max(0.0));
        prev = cdf;
    }
    Ok(HdWeights(weights))
}

pub fn hd_quantile(sample: &SortedSample, q: QuantileLevel) -> Result<f64> {
    let w = hd_weights(sample.len(), q)?;
    Ok(dot(w.as_slice(), sample.as_slice()))
}

pub fn type7_quantile(sample: &SortedSample, q: QuantileLevel) -> f64 {
    type7_sorted(sample.as_slice(), q.get())
}

/// Same fuzz as R's `quantile(type = 7)` so integral positions hit order statistics exactly.
const TYPE7_FUZZ: f64 = 4.0 * f64::EPSILON;

#[inline]
pub(crate) fn type7_sorted(x: &[f64], q: f64) -> f64 {
    let n = x.len();
    let pos = (n - 1) as f64 * q;
    let lo = (pos + TYPE7_FUZZ).floor();
    let mut frac = pos - lo;
    if frac.abs() < TYPE7_FUZZ {
        frac = 0.0;
    }
    let lo = lo as usize;
    if lo + 1 >= n || frac == 0.0 {
        x[lo.min(n - 1)]
    } else {
        x[lo] + frac * (x[lo + 1] - x[lo])
    }
}

#[inline]
fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(w, x)| w * x).sum()
}

/// Weights below this are dropped from the precomputed plan.
const WEIGHT_FLOOR: f64 = 1e-18;

#[derive(Debug, Clone)]
struct TrimmedWeights {
    offset: usize,
    w: Vec<f64>,
}

impl TrimmedWeights {
    fn new(full: HdWeights) -> Self {
        let w = full.0;
        let start = w.iter().position(|&v| v >= WEIGHT_FLOOR).unwrap_or(0);
        let end = w
            .iter()
            .rposition(|&v| v >= WEIGHT_FLOOR)
            .map_or(w.len(), |e| e + 1);
        TrimmedWeights {
            offset: start,
            w: w[start..end].to_vec(),
        }
    }

    #[inline]
    fn apply(&self, sorted: &[f64]) -> f64 {
        dot(&self.w, &sorted[self.offset..self.offset + self.w.len()])
    }
}

/// A fixed estimator and quantile family with Harrell-Davis weights cached per sample size.
///
/// Bootstrap resamples keep their size, so the weights are computed once and
/// reused for every replicate.
#[derive(Debug, Clone)]
pub struct QuantilePlan {
    estimator: Estimator,
    levels: Vec<QuantileLevel>,
    by_size: Vec<(usize, Vec<TrimmedWeights>)>,
}

impl QuantilePlan {
    pub fn new(
        estimator: Estimator,
        levels: &[QuantileLevel],
        sizes: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::invalid("quantile family is empty"));
        }
        let mut plan = QuantilePlan {
            estimator,
            levels: levels.to_vec(),
            by_size: Vec::new(),
        };
        for n in sizes {
            plan.add_size(n)?;
        }
        Ok(plan)
    }

    fn add_size(&mut self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::invalid("cannot plan quantiles for an empty sample"));
        }
        if self.estimator != Estimator::HarrellDavis || self.by_size.iter().any(|(m, _)| *m == n) {
            return Ok(());
        }
        let weights = self
            .levels
            .iter()
            .map(|&q| hd_weights(n, q).map(TrimmedWeights::new))
            .collect::<Result<Vec<_>>>()?;
        self.by_size.push((n, weights));
        Ok(())
    }

    pub fn estimator(&self) -> Estimator {
        self.estimator
    }

    pub fn levels(&self) -> &[QuantileLevel] {
        &self.levels
    }

    /// Estimates every planned quantile of an ascending slice into `out`.
    pub fn estimate_into(&self, sorted: &[f64], out: &mut [f64]) -> Result<()> {
        debug_assert_eq!(out.len(), self.levels.len());
        debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        if sorted.is_empty() {
            return Err(Error::invalid(
                "cannot estimate quantiles of an empty sample",
            ));
        }
        match self.estimator {
            Estimator::Type7 => {
                for (o, q) in out.iter_mut().zip(&self.levels) {
                    *o = type7_sorted(sorted, q.get());
                }
            }
            Estimator::HarrellDavis => {
                let n = sorted.len();
                let weights = self
                    .by_size
                    .iter()
                    .find(|(m, _)| *m == n)
                    .map(|(_, w)| w)
                    .ok_or_else(|| {
                        Error::invalid(format!("no Harrell-Davis weights planned for n = {n}"))
                    })?;
                for (o, w) in out.iter_mut().zip(weights) {
                    *o = w.apply(sorted);
                }
            }
        }
        Ok(())
    }

    pub fn estimate(&self, sorted: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.levels.len()];
        self.estimate_into(sorted, &mut out)?;
        Ok(out)
    }
}
