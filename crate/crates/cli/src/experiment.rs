//! TOML experiment files for `qshift simulate`.
//!
//! ```toml
//! seed = 2023          # master seed
//! n_sims = 2000
//! nboot = 600
//! alpha = 0.05
//! correction = "bh"
//!
//! [[condition]]
//! name = "normal-null"
//! population = { dist = "normal" }   # or cells = [ {...}, {...}, {...}, {...} ]
//! shift = [0.0, 0.0, 0.0, 0.0]       # optional, added per cell
//! n = [20, 30]                       # a number or a list
//! method = ["decinter_hd", "decinter_t7"]
//! contrast = "interaction"
//! ```
//!
//! List-valued `n`, `method` and `correction` expand to every combination.
//! Unless a condition sets `seed`, its seed derives from the master seed, the
//! condition name and `n`, so every method in a grid sees the same datasets.

use std::io::Write;
use std::path::Path;
use std::time::Duration;

use qshift_core::distributions::{BETA_BINOMIAL_FORM, MIXED_LOGNORMAL_FORM, MIXED_NORMAL_FORM};
use qshift_core::sim::{run_condition, validate_grid, DEFAULT_N_SIMS, DEFAULT_SIM_NBOOT};
use qshift_core::{
    ContrastKind, CorrectionMethod, DistributionSpec, Method, QuantileLevel, RngStream,
    SimCondition, SimulationReport,
};
use serde::{Deserialize, Serialize};

use crate::error::{usage, CliError, Result};
use crate::output::{num, SCHEMA_VERSION};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }

    fn is_list(&self) -> bool {
        matches!(self, OneOrMany::Many(_))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    seed: Option<u64>,
    n_sims: Option<usize>,
    nboot: Option<usize>,
    alpha: Option<f64>,
    correction: Option<CorrectionMethod>,
    #[serde(default)]
    condition: Vec<ConditionEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConditionEntry {
    name: String,
    population: Option<DistributionSpec>,
    cells: Option<Vec<DistributionSpec>>,
    shift: Option<[f64; 4]>,
    n: OneOrMany<usize>,
    method: OneOrMany<Method>,
    #[serde(default = "interaction")]
    contrast: ContrastKind,
    correction: Option<OneOrMany<CorrectionMethod>>,
    quantiles: Option<Vec<f64>>,
    n_sims: Option<usize>,
    nboot: Option<usize>,
    alpha: Option<f64>,
    seed: Option<u64>,
}

fn interaction() -> ContrastKind {
    ContrastKind::Interaction
}

pub const DEFAULT_MASTER_SEED: u64 = 2023;

/// Expanded, validated conditions of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub seed: u64,
    pub conditions: Vec<SimCondition>,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            usage(format!(
                "cannot read experiment file {}: {e}",
                path.display()
            ))
        })?;
        Self::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: ExperimentFile = toml::from_str(text).map_err(usage)?;
        if file.condition.is_empty() {
            return Err(usage("experiment has no [[condition]] entries"));
        }
        let master = file.seed.unwrap_or(DEFAULT_MASTER_SEED);
        let mut conditions = Vec::new();
        for entry in &file.condition {
            conditions.extend(expand(&file, master, entry)?);
        }
        let mut names: Vec<&str> = conditions.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(usage(format!("duplicate condition name '{}'", w[0])));
        }
        validate_grid(&conditions).map_err(usage)?;
        Ok(Experiment {
            seed: master,
            conditions,
        })
    }

    /// Replaces the simulation count and/or bootstrap size everywhere.
    pub fn override_sizes(&mut self, n_sims: Option<usize>, nboot: Option<usize>) -> Result<()> {
        for c in &mut self.conditions {
            c.n_sims = n_sims.unwrap_or(c.n_sims);
            c.nboot = nboot.unwrap_or(c.nboot);
        }
        validate_grid(&self.conditions).map_err(usage)
    }
}

fn expand(file: &ExperimentFile, master: u64, e: &ConditionEntry) -> Result<Vec<SimCondition>> {
    let ctx = |m: String| usage(format!("condition '{}': {m}", e.name));
    let mut cells: [DistributionSpec; 4] = match (&e.population, &e.cells) {
        (Some(p), None) => [*p; 4],
        (None, Some(c)) => c
            .as_slice()
            .try_into()
            .map_err(|_| ctx(format!("'cells' needs 4 entries, got {}", c.len())))?,
        _ => return Err(ctx("give exactly one of 'population' or 'cells'".into())),
    };
    if let Some(shift) = e.shift {
        for (c, s) in cells.iter_mut().zip(shift) {
            c.shift += s;
        }
    }
    let quantiles = e
        .quantiles
        .as_deref()
        .map(QuantileLevel::family)
        .transpose()
        .map_err(|err| ctx(err.to_string()))?;
    let corrections = e
        .correction
        .as_ref()
        .map(OneOrMany::to_vec)
        .unwrap_or_else(|| {
            vec![file
                .correction
                .unwrap_or(CorrectionMethod::BenjaminiHochberg)]
        });
    let n_list = e.n.is_list();
    let m_list = e.method.is_list();
    let c_list = e.correction.as_ref().is_some_and(OneOrMany::is_list);

    let mut out = Vec::new();
    for n in e.n.to_vec() {
        let seed = e.seed.unwrap_or_else(|| {
            RngStream::new(master)
                .tagged(&e.name)
                .index(n as u64)
                .seed_value()
        });
        for method in e.method.to_vec() {
            for &correction in &corrections {
                let mut name = e.name.clone();
                if n_list {
                    name.push_str(&format!("/n={n}"));
                }
                if m_list {
                    name.push_str(&format!("/{}", method.short_name()));
                }
                if c_list {
                    name.push_str(&format!("/{}", correction.short_name()));
                }
                let base = SimCondition::new(name, cells, n, method, e.contrast);
                out.push(SimCondition {
                    correction,
                    quantiles: quantiles.clone().unwrap_or(base.quantiles.clone()),
                    n_sims: e.n_sims.or(file.n_sims).unwrap_or(DEFAULT_N_SIMS),
                    nboot: e.nboot.or(file.nboot).unwrap_or(DEFAULT_SIM_NBOOT),
                    alpha: e.alpha.or(file.alpha).unwrap_or(base.alpha),
                    seed,
                    ..base
                });
            }
        }
    }
    Ok(out)
}

/// How the statistics were computed, for the metadata file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFlags {
    pub mixed_normal: String,
    pub mixed_lognormal: String,
    pub beta_binomial: String,
    pub kurtosis: String,
    pub p_value: String,
    pub confidence_interval: String,
    pub familywise_rejection: String,
    pub per_quantile_rates: String,
    pub anova: String,
    pub rng: String,
    pub seed_derivation: String,
    pub power_shifts: String,
}

impl Default for DesignFlags {
    fn default() -> Self {
        DesignFlags {
            mixed_normal: MIXED_NORMAL_FORM.into(),
            mixed_lognormal: MIXED_LOGNORMAL_FORM.into(),
            beta_binomial: BETA_BINOMIAL_FORM.into(),
            kurtosis: "non-excess, m4 / m2^2".into(),
            p_value: "2 * min(P, 1 - P), P = (#negative + 0.5 * #zero) / B".into(),
            confidence_interval:
                "sorted replicates [l, B - l - 1] (0-based), l = round_half_even(alpha * B / 2)"
                    .into(),
            familywise_rejection: "any adjusted p-value <= alpha".into(),
            per_quantile_rates: "unadjusted p-value <= alpha".into(),
            anova: "balanced two-way F test on means, df = (1, 4(n - 1))".into(),
            rng: "ChaCha8 stream per (seed, simulation, cell) and per bootstrap replicate".into(),
            seed_derivation: "condition seed from (master seed, condition name, n) unless given"
                .into(),
            power_shifts: "location shifts are set in the experiment file (artifact-chosen)".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionMeta {
    pub name: String,
    pub seed: u64,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub schema_version: u32,
    pub generator: String,
    pub experiment: String,
    pub master_seed: u64,
    pub design: DesignFlags,
    pub conditions: Vec<ConditionMeta>,
}

pub const CSV_HEADER: [&str; 16] = [
    "condition",
    "method",
    "contrast",
    "correction",
    "n",
    "n_sims",
    "nboot",
    "alpha",
    "seed",
    "cells",
    "quantiles",
    "rate",
    "rate_se",
    "per_quantile_rates",
    "per_quantile_se",
    "error",
];

fn joined(v: impl IntoIterator<Item = String>) -> String {
    v.into_iter().collect::<Vec<_>>().join(";")
}

fn csv_row(c: &SimCondition, result: &qshift_core::Result<SimulationReport>) -> Vec<String> {
    let mut row = vec![
        c.name.clone(),
        c.method.short_name().into(),
        c.contrast.short_name().into(),
        c.correction.short_name().into(),
        c.n_per_group.to_string(),
        c.n_sims.to_string(),
        c.nboot.to_string(),
        num(c.alpha),
        c.seed.to_string(),
        joined(c.cells.iter().map(ToString::to_string)),
        joined(c.quantiles.iter().map(|q| num(q.get()))),
    ];
    match result {
        Ok(r) => row.extend([
            num(r.rate),
            num(r.rate_se),
            joined(r.per_quantile_rates.iter().map(|&x| num(x))),
            joined(r.per_quantile_se.iter().map(|&x| num(x))),
            String::new(),
        ]),
        Err(e) => row.extend([
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            e.to_string(),
        ]),
    }
    row
}

/// Runs every condition in order, logging progress. Failures are collected.
pub fn run(experiment: &Experiment) -> Vec<qshift_core::Result<SimulationReport>> {
    let total = experiment.conditions.len();
    experiment
        .conditions
        .iter()
        .enumerate()
        .map(|(i, c)| {
            log::info!("[{}/{total}] {} ({} sims)", i + 1, c.name, c.n_sims);
            let r = run_condition(c);
            match &r {
                Ok(r) => log::info!(
                    "[{}/{total}] {}: rate {} in {:.1}s",
                    i + 1,
                    c.name,
                    num(r.rate),
                    r.wall_time.as_secs_f64()
                ),
                Err(e) => log::error!("[{}/{total}] {}: {e}", i + 1, c.name),
            }
            r
        })
        .collect()
}

pub fn write_csv(
    experiment: &Experiment,
    results: &[qshift_core::Result<SimulationReport>],
    out: &mut dyn Write,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for (c, r) in experiment.conditions.iter().zip(results) {
        w.write_record(csv_row(c, r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn metadata(
    path: &Path,
    experiment: &Experiment,
    results: &[qshift_core::Result<SimulationReport>],
) -> Metadata {
    Metadata {
        schema_version: SCHEMA_VERSION,
        generator: format!("qshift {}", env!("CARGO_PKG_VERSION")),
        experiment: path.display().to_string(),
        master_seed: experiment.seed,
        design: DesignFlags::default(),
        conditions: experiment
            .conditions
            .iter()
            .zip(results)
            .map(|(c, r)| ConditionMeta {
                name: c.name.clone(),
                seed: c.seed,
                ok: r.is_ok(),
                error: r.as_ref().err().map(ToString::to_string),
                wall_time_secs: r
                    .as_ref()
                    .map_or(Duration::ZERO, |r| r.wall_time)
                    .as_secs_f64(),
            })
            .collect(),
    }
}

pub fn failures(results: &[qshift_core::Result<SimulationReport>]) -> Option<CliError> {
    let failed = results.iter().filter(|r| r.is_err()).count();
    (failed > 0)
        .then(|| CliError::Failed(format!("{failed} of {} condition(s) failed", results.len())))
}
