//! Monte Carlo estimation of familywise error and familywise power.
//!
//! Simulation `i` of a condition draws its four cells from the streams
//! `(seed, "simulation", i, "cell", c)` and seeds its bootstrap from
//! `(seed, "simulation", i, "bootstrap")`. Rejection counts are integers, so
//! the aggregate is identical for any thread count or schedule.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anova::anova_f_test;
use crate::bootstrap::{BootstrapConfig, DEFAULT_ALPHA};
use crate::contrast::{decinter_with_plan, ContrastKind, FactorialSample, QuantileTestRow};
use crate::distributions::{generate, DistributionSpec};
use crate::error::{Error, Result};
use crate::multcomp::CorrectionMethod;
use crate::pairwise::iband_with_plan;
use crate::quantile::{Estimator, QuantileLevel, QuantilePlan};
use crate::rng::RngStream;

pub const DEFAULT_N_SIMS: usize = 2000;
pub const DEFAULT_SIM_NBOOT: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DecinterHd,
    DecinterT7,
    IbandHd,
    IbandT7,
    AnovaMeans,
    /// Reserved so externally produced results can share the report schema.
    AnovaTrimmed,
}

impl Method {
    pub fn short_name(self) -> &'static str {
        match self {
            Method::DecinterHd => "decinter_hd",
            Method::DecinterT7 => "decinter_t7",
            Method::IbandHd => "iband_hd",
            Method::IbandT7 => "iband_t7",
            Method::AnovaMeans => "anova_means",
            Method::AnovaTrimmed => "anova_trimmed",
        }
    }

    pub fn estimator(self) -> Option<Estimator> {
        match self {
            Method::DecinterHd | Method::IbandHd => Some(Estimator::HarrellDavis),
            Method::DecinterT7 | Method::IbandT7 => Some(Estimator::Type7),
            Method::AnovaMeans | Method::AnovaTrimmed => None,
        }
    }

    pub fn is_iband(self) -> bool {
        matches!(self, Method::IbandHd | Method::IbandT7)
    }

    /// Quantile family used when a condition does not list one.
    pub fn default_quantiles(self) -> Vec<QuantileLevel> {
        match self {
            Method::IbandHd | Method::IbandT7 => QuantileLevel::quartiles_and_extremes(),
            Method::DecinterHd | Method::DecinterT7 => QuantileLevel::deciles(),
            Method::AnovaMeans | Method::AnovaTrimmed => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimCondition {
    pub name: String,
    /// Populations in `[A1B1, A1B2, A2B1, A2B2]` order.
    pub cells: [DistributionSpec; 4],
    pub n_per_group: usize,
    pub method: Method,
    pub contrast: ContrastKind,
    pub correction: CorrectionMethod,
    pub quantiles: Vec<QuantileLevel>,
    pub n_sims: usize,
    pub nboot: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl SimCondition {
    /// A condition with desk-scale defaults.
    pub fn new(
        name: impl Into<String>,
        cells: [DistributionSpec; 4],
        n_per_group: usize,
        method: Method,
        contrast: ContrastKind,
    ) -> Self {
        SimCondition {
            name: name.into(),
            cells,
            n_per_group,
            method,
            contrast,
            correction: CorrectionMethod::BenjaminiHochberg,
            quantiles: method.default_quantiles(),
            n_sims: DEFAULT_N_SIMS,
            nboot: DEFAULT_SIM_NBOOT,
            alpha: DEFAULT_ALPHA,
            seed: 1,
        }
    }

    pub fn is_null(&self) -> bool {
        self.cells.iter().all(|c| c == &self.cells[0])
    }

    fn bootstrap_config(&self, seed: u64) -> Option<BootstrapConfig> {
        self.method.estimator().map(|estimator| BootstrapConfig {
            nboot: self.nboot,
            alpha: self.alpha,
            seed,
            estimator,
            quantiles: self.quantiles.clone(),
            shared_samples: true,
            parallel: false,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let ctx = |e: Error| e.context(format!("condition '{}'", self.name));
        if self.n_sims == 0 {
            return Err(ctx(Error::invalid("n_sims must be at least 1")));
        }
        if self.n_per_group < 2 {
            return Err(ctx(Error::invalid("n_per_group must be at least 2")));
        }
        for spec in &self.cells {
            spec.validate().map_err(ctx)?;
        }
        match self.method {
            Method::AnovaTrimmed => {
                return Err(ctx(Error::invalid(
                    "anova_trimmed is a reserved report tag and cannot be simulated",
                )))
            }
            Method::AnovaMeans => {
                if !(self.alpha > 0.0 && self.alpha < 1.0) {
                    return Err(ctx(Error::invalid(format!(
                        "alpha {} is outside (0, 1)",
                        self.alpha
                    ))));
                }
            }
            m => {
                if m.is_iband() && self.contrast != ContrastKind::Interaction {
                    return Err(ctx(Error::invalid(
                        "pairwise-difference methods only test the interaction",
                    )));
                }
                self.bootstrap_config(0).unwrap().validate().map_err(ctx)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub condition: SimCondition,
    /// FWER under a null condition, familywise power otherwise.
    pub rate: f64,
    pub rate_se: f64,
    /// Uncorrected per-quantile rejection rates (empty for ANOVA).
    pub per_quantile_rates: Vec<f64>,
    pub per_quantile_se: Vec<f64>,
    pub n_sims: usize,
    pub wall_time: Duration,
}

/// Binomial standard error of a proportion.
pub fn binomial_se(rate: f64, trials: usize) -> f64 {
    (rate * (1.0 - rate) / trials as f64).sqrt()
}

struct Outcome {
    any: bool,
    per_quantile: Vec<bool>,
}

fn quantile_outcome(rows: &[QuantileTestRow], alpha: f64) -> Outcome {
    Outcome {
        any: rows.iter().any(|r| r.p_adjusted <= alpha),
        per_quantile: rows.iter().map(|r| r.p_value <= alpha).collect(),
    }
}

fn simulate_once(cond: &SimCondition, plan: Option<&QuantilePlan>, i: usize) -> Result<Outcome> {
    let stream = RngStream::new(cond.seed)
        .tagged("simulation")
        .index(i as u64);
    let mut cells: [Vec<f64>; 4] = Default::default();
    for (c, (spec, out)) in cond.cells.iter().zip(cells.iter_mut()).enumerate() {
        *out = generate(
            spec,
            cond.n_per_group,
            stream.tagged("cell").index(c as u64),
        )?;
    }
    let data = FactorialSample::from_flat(cells)?;
    let boot_seed = stream.tagged("bootstrap").seed_value();

    match (cond.method, plan) {
        (Method::AnovaMeans, _) => {
            let p = anova_f_test(&data)?.p_for(cond.contrast);
            Ok(Outcome {
                any: p <= cond.alpha,
                per_quantile: Vec::new(),
            })
        }
        (m, Some(plan)) if m.is_iband() => {
            let config = cond.bootstrap_config(boot_seed).unwrap();
            let rows = iband_with_plan(&data, &config, cond.correction, plan)?;
            Ok(quantile_outcome(&rows, cond.alpha))
        }
        (_, Some(plan)) => {
            let config = cond.bootstrap_config(boot_seed).unwrap();
            let rows = decinter_with_plan(&data, cond.contrast, &config, cond.correction, plan)?;
            Ok(quantile_outcome(&rows, cond.alpha))
        }
        (m, None) => Err(Error::invalid(format!(
            "{} cannot be simulated",
            m.short_name()
        ))),
    }
}

/// Runs every simulation of one condition.
pub fn run_condition(cond: &SimCondition) -> Result<SimulationReport> {
    cond.validate()?;
    let start = Instant::now();
    let n = cond.n_per_group;
    let plan = match cond.method.estimator() {
        Some(est) if cond.method.is_iband() => {
            Some(QuantilePlan::new(est, &cond.quantiles, [n * n])?)
        }
        Some(est) => Some(QuantilePlan::new(est, &cond.quantiles, [n])?),
        None => None,
    };

    let outcomes: Vec<Outcome> = (0..cond.n_sims)
        .into_par_iter()
        .map(|i| {
            simulate_once(cond, plan.as_ref(), i)
                .map_err(|e| e.context(format!("condition '{}', simulation {i}", cond.name)))
        })
        .collect::<Result<_>>()?;

    let trials = cond.n_sims;
    let any = outcomes.iter().filter(|o| o.any).count();
    let width = outcomes.first().map_or(0, |o| o.per_quantile.len());
    let per_quantile_rates: Vec<f64> = (0..width)
        .map(|k| outcomes.iter().filter(|o| o.per_quantile[k]).count() as f64 / trials as f64)
        .collect();
    let rate = any as f64 / trials as f64;
    Ok(SimulationReport {
        rate,
        rate_se: binomial_se(rate, trials),
        per_quantile_se: per_quantile_rates
            .iter()
            .map(|&r| binomial_se(r, trials))
            .collect(),
        per_quantile_rates,
        n_sims: trials,
        wall_time: start.elapsed(),
        condition: cond.clone(),
    })
}

/// Type I error run: all four populations must be identical.
pub fn run_fwer(cond: &SimCondition) -> Result<SimulationReport> {
    if !cond.is_null() {
        return Err(Error::invalid(format!(
            "condition '{}' is not a null condition: cell populations differ",
            cond.name
        )));
    }
    run_condition(cond)
}

/// Power run: at least one population must differ.
pub fn run_power(cond: &SimCondition) -> Result<SimulationReport> {
    if cond.is_null() {
        return Err(Error::invalid(format!(
            "condition '{}' has identical cell populations; use run_fwer",
            cond.name
        )));
    }
    run_condition(cond)
}

/// Checks a grid before anything runs.
pub fn validate_grid(grid: &[SimCondition]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("simulation grid is empty"));
    }
    grid.iter().try_for_each(SimCondition::validate)
}

/// Runs every condition. A failing condition does not stop the others.
pub fn sweep(grid: &[SimCondition]) -> Result<Vec<Result<SimulationReport>>> {
    validate_grid(grid)?;
    Ok(grid.iter().map(run_condition).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Population;

    fn normal_cells() -> [DistributionSpec; 4] {
        [Population::Normal.into(); 4]
    }

    fn quick(method: Method) -> SimCondition {
        SimCondition {
            n_sims: 40,
            nboot: 100,
            ..SimCondition::new(
                "quick",
                normal_cells(),
                20,
                method,
                ContrastKind::Interaction,
            )
        }
    }

    #[test]
    fn validation() {
        let mut c = quick(Method::DecinterHd);
        c.quantiles.clear();
        assert!(matches!(sweep(&[c]), Err(Error::Context { .. })));
        assert!(sweep(&[]).is_err());
        let c = SimCondition {
            contrast: ContrastKind::MainA,
            ..quick(Method::IbandHd)
        };
        assert!(c.validate().is_err());
        assert!(quick(Method::AnovaTrimmed).validate().is_err());
        let c = SimCondition {
            n_sims: 0,
            ..quick(Method::AnovaMeans)
        };
        assert!(c.validate().is_err());
        let c = SimCondition {
            nboot: 10,
            ..quick(Method::DecinterT7)
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn null_and_power_guards() {
        let null = quick(Method::AnovaMeans);
        assert!(run_power(&null).is_err());
        let mut alt = null.clone();
        alt.cells[3] = DistributionSpec::new(Population::Normal).shifted(1.0);
        assert!(run_fwer(&alt).is_err());
        assert!(run_power(&alt).is_ok());
    }

    #[test]
    fn identical_conditions_identical_reports() {
        let c = quick(Method::DecinterHd);
        let reports = sweep(&[c.clone(), c]).unwrap();
        let a = reports[0].as_ref().unwrap();
        let b = reports[1].as_ref().unwrap();
        assert_eq!(a.rate, b.rate);
        assert_eq!(a.per_quantile_rates, b.per_quantile_rates);
        assert_eq!(a.per_quantile_rates.len(), 9);
        assert!(a.per_quantile_rates.iter().all(|r| (0.0..=1.0).contains(r)));
    }

    #[test]
    fn anova_report_shape() {
        let r = run_fwer(&quick(Method::AnovaMeans)).unwrap();
        assert!(r.per_quantile_rates.is_empty());
        assert!((0.0..=1.0).contains(&r.rate));
        assert_eq!(r.rate_se, binomial_se(r.rate, 40));
    }

    #[test]
    fn thread_count_does_not_matter() {
        let c = quick(Method::IbandT7);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let three = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let a = one.install(|| run_condition(&c)).unwrap();
        let b = three.install(|| run_condition(&c)).unwrap();
        assert_eq!(
            (a.rate, &a.per_quantile_rates),
            (b.rate, &b.per_quantile_rates)
        );
    }
}
