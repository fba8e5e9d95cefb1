//! Quantile-level interaction and main-effect tests for a 2x2 design.

use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_statistic, BootstrapConfig, InferenceResult, ReplicateStatistic};
use crate::error::{Error, Result};
use crate::multcomp::CorrectionMethod;
use crate::quantile::{QuantileLevel, QuantilePlan};

/// Below this per-cell size a warning is logged.
pub const MIN_RECOMMENDED_N: usize = 20;
/// Extreme quantiles (outside `[.1, .9]`) are unreliable below this size.
pub const MIN_N_EXTREME_QUANTILES: usize = 30;

/// Level labels for the two factors, in the orientation used for analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorLabels {
    pub a: [String; 2],
    pub b: [String; 2],
}

impl Default for FactorLabels {
    fn default() -> Self {
        FactorLabels {
            a: ["A1".into(), "A2".into()],
            b: ["B1".into(), "B2".into()],
        }
    }
}

/// The four cell samples of a 2x2 between-subjects design.
///
/// `cell(j, k)` is level `j` of factor A and level `k` of factor B (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct FactorialSample {
    cells: [[Vec<f64>; 2]; 2],
    labels: FactorLabels,
}

impl FactorialSample {
    pub fn new(cells: [[Vec<f64>; 2]; 2]) -> Result<Self> {
        Self::with_labels(cells, FactorLabels::default())
    }

    pub fn with_labels(cells: [[Vec<f64>; 2]; 2], labels: FactorLabels) -> Result<Self> {
        for (j, row) in cells.iter().enumerate() {
            for (k, cell) in row.iter().enumerate() {
                let name = format!("{}/{}", labels.a[j], labels.b[k]);
                if cell.is_empty() {
                    return Err(Error::invalid(format!("cell {name} is empty")));
                }
                if let Some(i) = cell.iter().position(|v| !v.is_finite()) {
                    return Err(Error::invalid(format!(
                        "cell {name} has a non-finite value at position {i}"
                    )));
                }
            }
        }
        Ok(FactorialSample { cells, labels })
    }

    /// Builds from cells in `[A1B1, A1B2, A2B1, A2B2]` order.
    pub fn from_flat(cells: [Vec<f64>; 4]) -> Result<Self> {
        let [c11, c12, c21, c22] = cells;
        Self::new([[c11, c12], [c21, c22]])
    }

    pub fn cell(&self, a: usize, b: usize) -> &[f64] {
        &self.cells[a][b]
    }

    pub fn labels(&self) -> &FactorLabels {
        &self.labels
    }

    /// Cells in `[A1B1, A1B2, A2B1, A2B2]` order.
    pub fn flat(&self) -> [&[f64]; 4] {
        [
            &self.cells[0][0],
            &self.cells[0][1],
            &self.cells[1][0],
            &self.cells[1][1],
        ]
    }

    pub fn sizes(&self) -> [usize; 4] {
        self.flat().map(<[f64]>::len)
    }

    /// Common cell size when the design is balanced.
    pub fn balanced_n(&self) -> Option<usize> {
        let s = self.sizes();
        s.iter().all(|&n| n == s[0]).then_some(s[0])
    }

    /// Exchanges the roles of the two factors (rows become columns).
    pub fn transposed(&self) -> Self {
        let c = &self.cells;
        FactorialSample {
            cells: [
                [c[0][0].clone(), c[1][0].clone()],
                [c[0][1].clone(), c[1][1].clone()],
            ],
            labels: FactorLabels {
                a: self.labels.b.clone(),
                b: self.labels.a.clone(),
            },
        }
    }

    /// Exchanges the two levels of factor A.
    pub fn swap_a_levels(&self) -> Self {
        let c = &self.cells;
        FactorialSample {
            cells: [
                [c[1][0].clone(), c[1][1].clone()],
                [c[0][0].clone(), c[0][1].clone()],
            ],
            labels: FactorLabels {
                a: [self.labels.a[1].clone(), self.labels.a[0].clone()],
                b: self.labels.b.clone(),
            },
        }
    }

    /// Adds `c` to every observation.
    pub fn shifted(&self, c: f64) -> Self {
        let shift = |v: &Vec<f64>| v.iter().map(|x| x + c).collect::<Vec<_>>();
        FactorialSample {
            cells: [
                [shift(&self.cells[0][0]), shift(&self.cells[0][1])],
                [shift(&self.cells[1][0]), shift(&self.cells[1][1])],
            ],
            labels: self.labels.clone(),
        }
    }

    pub(crate) fn warn_small_cells(&self, levels: &[QuantileLevel]) {
        let smallest = self.sizes().into_iter().min().unwrap_or(0);
        if smallest < MIN_RECOMMENDED_N {
            log::warn!("smallest cell has n = {smallest}; at least {MIN_RECOMMENDED_N} per cell is recommended");
        }
        if smallest < MIN_N_EXTREME_QUANTILES
            && levels.iter().any(|q| q.get() < 0.1 || q.get() > 0.9)
        {
            log::warn!(
                "quantiles outside [.1, .9] with n = {smallest} < {MIN_N_EXTREME_QUANTILES} per cell may have inflated error rates"
            );
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContrastKind {
    Interaction,
    #[serde(alias = "main-a")]
    MainA,
    #[serde(alias = "main-b")]
    MainB,
}

impl ContrastKind {
    pub fn short_name(self) -> &'static str {
        match self {
            ContrastKind::Interaction => "interaction",
            ContrastKind::MainA => "main_a",
            ContrastKind::MainB => "main_b",
        }
    }
}

/// Level summaries and the tested contrast for one quantile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastValue {
    pub lev1: f64,
    pub lev2: f64,
    pub psi: f64,
}

/// Quantile estimates `θ = [θ11, θ12, θ21, θ22]` combined into a contrast.
///
/// The interaction is formed as `(θ11 + θ22) - (θ12 + θ21)` so that swapping
/// `θ12` and `θ21` leaves it bitwise unchanged.
#[inline]
pub fn contrast_value(theta: [f64; 4], kind: ContrastKind) -> ContrastValue {
    let [t11, t12, t21, t22] = theta;
    match kind {
        ContrastKind::Interaction => ContrastValue {
            lev1: t11 - t12,
            lev2: t21 - t22,
            psi: (t11 + t22) - (t12 + t21),
        },
        ContrastKind::MainA => {
            let (lev1, lev2) = ((t11 + t12) / 2.0, (t21 + t22) / 2.0);
            ContrastValue {
                lev1,
                lev2,
                psi: lev1 - lev2,
            }
        }
        ContrastKind::MainB => {
            let (lev1, lev2) = ((t11 + t21) / 2.0, (t12 + t22) / 2.0);
            ContrastValue {
                lev1,
                lev2,
                psi: lev1 - lev2,
            }
        }
    }
}

/// One row of a quantile test table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileTestRow {
    pub q: QuantileLevel,
    pub est_lev1: f64,
    pub est_lev2: f64,
    pub dif: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub p_value: f64,
    pub p_adjusted: f64,
}

pub(crate) fn build_rows(
    levels: &[QuantileLevel],
    summaries: &[(f64, f64)],
    inference: &[InferenceResult],
    correction: CorrectionMethod,
) -> Vec<QuantileTestRow> {
    let p: Vec<f64> = inference.iter().map(|r| r.p_value).collect();
    let adjusted = correction.adjust(&p);
    levels
        .iter()
        .zip(summaries)
        .zip(inference)
        .zip(adjusted)
        .map(|(((&q, &(lev1, lev2)), inf), p_adjusted)| QuantileTestRow {
            q,
            est_lev1: lev1,
            est_lev2: lev2,
            dif: inf.estimate,
            ci_low: inf.ci_low,
            ci_high: inf.ci_high,
            p_value: inf.p_value,
            p_adjusted,
        })
        .collect()
}

/// Sorts each cell and estimates the planned quantiles into `theta[cell]`.
fn cell_quantiles(
    plan: &QuantilePlan,
    cells: &mut [Vec<f64>],
    theta: &mut [Vec<f64>; 4],
) -> Result<()> {
    for (cell, out) in cells.iter_mut().zip(theta.iter_mut()) {
        cell.sort_unstable_by(f64::total_cmp);
        plan.estimate_into(cell, out)?;
    }
    Ok(())
}

struct DecinterStatistic<'a> {
    plan: &'a QuantilePlan,
    kind: ContrastKind,
}

impl ReplicateStatistic for DecinterStatistic<'_> {
    type Scratch = [Vec<f64>; 4];

    fn width(&self) -> usize {
        self.plan.levels().len()
    }

    fn scratch(&self) -> Self::Scratch {
        std::array::from_fn(|_| vec![0.0; self.width()])
    }

    fn evaluate(
        &self,
        cells: &mut [Vec<f64>],
        theta: &mut Self::Scratch,
        out: &mut [f64],
    ) -> Result<()> {
        cell_quantiles(self.plan, cells, theta)?;
        for (k, o) in out.iter_mut().enumerate() {
            let t = [theta[0][k], theta[1][k], theta[2][k], theta[3][k]];
            *o = contrast_value(t, self.kind).psi;
        }
        Ok(())
    }
}

/// Builds the quantile plan `decinter` needs for this design.
pub fn decinter_plan(data: &FactorialSample, config: &BootstrapConfig) -> Result<QuantilePlan> {
    QuantilePlan::new(config.estimator, &config.quantiles, data.sizes())
}

/// Percentile-bootstrap test of a quantile contrast at every configured level.
pub fn decinter(
    data: &FactorialSample,
    kind: ContrastKind,
    config: &BootstrapConfig,
    correction: CorrectionMethod,
) -> Result<Vec<QuantileTestRow>> {
    config.validate()?;
    let plan = decinter_plan(data, config)?;
    decinter_with_plan(data, kind, config, correction, &plan)
}

/// [`decinter`] with a precomputed plan. The plan must match `config`.
pub fn decinter_with_plan(
    data: &FactorialSample,
    kind: ContrastKind,
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

    let width = config.quantiles.len();
    let mut cells: Vec<Vec<f64>> = data.flat().iter().map(|c| c.to_vec()).collect();
    let mut theta: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; width]);
    cell_quantiles(plan, &mut cells, &mut theta)?;
    let values: Vec<ContrastValue> = (0..width)
        .map(|k| contrast_value([theta[0][k], theta[1][k], theta[2][k], theta[3][k]], kind))
        .collect();

    let statistic = DecinterStatistic { plan, kind };
    let dists = bootstrap_statistic(&data.flat(), &statistic, config)
        .map_err(|e| e.context(format!("{} bootstrap", kind.short_name())))?;

    let inference = values
        .iter()
        .zip(&dists)
        .map(|(v, d)| InferenceResult::from_distribution(v.psi, d, config.alpha))
        .collect::<Result<Vec<_>>>()?;
    let summaries: Vec<(f64, f64)> = values.iter().map(|v| (v.lev1, v.lev2)).collect();
    Ok(build_rows(
        &config.quantiles,
        &summaries,
        &inference,
        correction,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantile::Estimator;

    fn config(nboot: usize) -> BootstrapConfig {
        BootstrapConfig {
            nboot,
            ..BootstrapConfig::default()
        }
    }

    fn wavy(n: usize, phase: f64, scale: f64) -> Vec<f64> {
        (0..n)
            .map(|i| scale * ((i as f64 + phase) * 0.731).sin() + i as f64 * 0.01)
            .collect()
    }

    fn sample() -> FactorialSample {
        FactorialSample::from_flat([
            wavy(23, 0.0, 1.0),
            wavy(31, 1.3, 2.0),
            wavy(27, 2.1, 0.5),
            wavy(25, 0.4, 1.5),
        ])
        .unwrap()
    }

    #[test]
    fn contrast_examples() {
        let c = contrast_value([1.0; 4], ContrastKind::Interaction);
        assert_eq!((c.lev1, c.lev2, c.psi), (0.0, 0.0, 0.0));
        let c = contrast_value([4.0, 1.0, 3.0, 2.0], ContrastKind::Interaction);
        assert_eq!((c.lev1, c.lev2, c.psi), (3.0, 1.0, 2.0));
        let c = contrast_value([4.0, 1.0, 3.0, 2.0], ContrastKind::MainA);
        assert_eq!((c.lev1, c.lev2, c.psi), (2.5, 2.5, 0.0));
        let c = contrast_value([4.0, 1.0, 3.0, 2.0], ContrastKind::MainB);
        assert_eq!((c.lev1, c.lev2, c.psi), (3.5, 1.5, 2.0));
    }

    #[test]
    fn rejects_bad_cells() {
        assert!(FactorialSample::from_flat([vec![], vec![1.0], vec![1.0], vec![1.0]]).is_err());
        assert!(
            FactorialSample::from_flat([vec![f64::NAN], vec![1.0], vec![1.0], vec![1.0]]).is_err()
        );
    }

    #[test]
    fn constant_cells_give_unit_p() {
        let data = FactorialSample::from_flat([
            vec![3.0; 20],
            vec![3.0; 20],
            vec![3.0; 20],
            vec![3.0; 20],
        ])
        .unwrap();
        for kind in [
            ContrastKind::Interaction,
            ContrastKind::MainA,
            ContrastKind::MainB,
        ] {
            for est in [Estimator::HarrellDavis, Estimator::Type7] {
                let cfg = BootstrapConfig {
                    estimator: est,
                    ..config(200)
                };
                let rows =
                    decinter(&data, kind, &cfg, CorrectionMethod::BenjaminiHochberg).unwrap();
                assert_eq!(rows.len(), 9);
                for r in rows {
                    assert_eq!(r.dif, 0.0);
                    assert_eq!(r.p_value, 1.0);
                    assert_eq!(r.p_adjusted, 1.0);
                }
            }
        }
    }

    #[test]
    fn rows_are_consistent() {
        let data = sample();
        for kind in [
            ContrastKind::Interaction,
            ContrastKind::MainA,
            ContrastKind::MainB,
        ] {
            let rows = decinter(&data, kind, &config(300), CorrectionMethod::Hochberg).unwrap();
            for r in &rows {
                assert!((r.dif - (r.est_lev1 - r.est_lev2)).abs() < 1e-9);
                assert!(r.ci_low <= r.ci_high);
                assert!(r.p_adjusted >= r.p_value);
                assert!((0.0..=1.0).contains(&r.p_value));
            }
        }
    }

    #[test]
    fn interchange_invariance_is_exact() {
        let data = sample();
        let a = decinter(
            &data,
            ContrastKind::Interaction,
            &config(100),
            CorrectionMethod::None,
        )
        .unwrap();
        let b = decinter(
            &data.transposed(),
            ContrastKind::Interaction,
            &config(100),
            CorrectionMethod::None,
        )
        .unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.dif, y.dif);
        }
    }

    #[test]
    fn swapping_a_levels_negates() {
        let data = sample();
        for kind in [ContrastKind::Interaction, ContrastKind::MainA] {
            let a = decinter(&data, kind, &config(100), CorrectionMethod::None).unwrap();
            let b = decinter(
                &data.swap_a_levels(),
                kind,
                &config(100),
                CorrectionMethod::None,
            )
            .unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x.dif, -y.dif);
            }
        }
    }

    #[test]
    fn translation_leaves_interaction_unchanged() {
        let data = sample();
        let a = decinter(
            &data,
            ContrastKind::Interaction,
            &config(100),
            CorrectionMethod::None,
        )
        .unwrap();
        let b = decinter(
            &data.shifted(123.4),
            ContrastKind::Interaction,
            &config(100),
            CorrectionMethod::None,
        )
        .unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.dif - y.dif).abs() < 1e-9);
        }
    }

    #[test]
    fn plan_mismatch_rejected() {
        let data = sample();
        let cfg = config(100);
        let other = BootstrapConfig {
            estimator: Estimator::Type7,
            ..cfg.clone()
        };
        let plan = decinter_plan(&data, &other).unwrap();
        assert!(decinter_with_plan(
            &data,
            ContrastKind::MainB,
            &cfg,
            CorrectionMethod::None,
            &plan
        )
        .is_err());
    }
}
