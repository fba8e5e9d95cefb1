use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qshift_core::bootstrap::{DEFAULT_ALPHA, DEFAULT_NBOOT, DEFAULT_SEED};
use qshift_core::{BootstrapConfig, ContrastKind, CorrectionMethod, Estimator, QuantileLevel};

use crate::error::{usage, Result};

#[derive(Debug, Parser)]
#[command(
    name = "qshift",
    version,
    about = "Quantile shift tests for 2x2 between-subjects designs"
)]
pub struct Cli {
    /// Worker threads for bootstrap and simulation loops (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Report progress on stderr.
    #[arg(long, global = true)]
    pub progress: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test quantile interaction or main-effect contrasts (deciles by default).
    Decinter(DecinterArgs),
    /// Test the interaction on quantiles of all pairwise differences.
    Iband(IbandArgs),
    /// Run a Monte Carlo experiment file and write one CSV row per condition.
    Simulate(SimulateArgs),
    /// Emit shift-function points for plotting.
    Plotdata(PlotdataArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Long-format CSV with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Column holding factor A labels.
    #[arg(long)]
    pub factor_a: String,
    /// Column holding factor B labels.
    #[arg(long)]
    pub factor_b: String,
    /// Column holding the response.
    #[arg(long)]
    pub value: String,
    /// Level order as "A1,A2,B1,B2"; levels sort lexicographically otherwise.
    #[arg(long)]
    pub level_order: Option<String>,
}

#[derive(Debug, Args)]
pub struct BootArgs {
    #[arg(long, value_enum, default_value_t = EstimatorArg::Hd)]
    pub estimator: EstimatorArg,
    /// Comma-separated quantile levels in (0, 1).
    #[arg(long)]
    pub quantiles: Option<String>,
    #[arg(long, default_value_t = DEFAULT_NBOOT)]
    pub nboot: usize,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = CorrectionArg::Bh)]
    pub correction: CorrectionArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

impl BootArgs {
    pub fn config(&self, default_quantiles: Vec<QuantileLevel>) -> Result<BootstrapConfig> {
        let quantiles = match &self.quantiles {
            Some(s) => parse_quantiles(s)?,
            None => default_quantiles,
        };
        let config = BootstrapConfig {
            nboot: self.nboot,
            alpha: self.alpha,
            seed: self.seed,
            estimator: self.estimator.into(),
            quantiles,
            ..BootstrapConfig::default()
        };
        config.validate().map_err(usage)?;
        Ok(config)
    }
}

pub fn parse_quantiles(s: &str) -> Result<Vec<QuantileLevel>> {
    let levels = s
        .split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .map_err(|_| usage(format!("--quantiles: '{t}' is not a number")))
        })
        .collect::<Result<Vec<f64>>>()?;
    QuantileLevel::family(&levels).map_err(|e| usage(format!("--quantiles: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Hd,
    T7,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Hd => Estimator::HarrellDavis,
            EstimatorArg::T7 => Estimator::Type7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorrectionArg {
    Bh,
    Hochberg,
    None,
}

impl From<CorrectionArg> for CorrectionMethod {
    fn from(c: CorrectionArg) -> Self {
        match c {
            CorrectionArg::Bh => CorrectionMethod::BenjaminiHochberg,
            CorrectionArg::Hochberg => CorrectionMethod::Hochberg,
            CorrectionArg::None => CorrectionMethod::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ContrastArg {
    Interaction,
    MainA,
    MainB,
}

impl From<ContrastArg> for ContrastKind {
    fn from(c: ContrastArg) -> Self {
        match c {
            ContrastArg::Interaction => ContrastKind::Interaction,
            ContrastArg::MainA => ContrastKind::MainA,
            ContrastArg::MainB => ContrastKind::MainB,
        }
    }
}

#[derive(Debug, Args)]
pub struct DecinterArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub boot: BootArgs,
    #[arg(long, value_enum, default_value_t = ContrastArg::Interaction)]
    pub contrast: ContrastArg,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    pub format: Format,
    /// Write results here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IbandArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub boot: BootArgs,
    /// Also report P(X < Y) between the B levels at each level of A.
    #[arg(long)]
    pub ph: bool,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Experiment file (TOML).
    pub experiment: PathBuf,
    /// CSV report path (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// JSON metadata path; nothing is written without it.
    #[arg(long)]
    pub metadata: Option<PathBuf>,
    /// Override the number of simulations of every condition.
    #[arg(long)]
    pub n_sims: Option<usize>,
    /// Override the bootstrap size of every condition.
    #[arg(long)]
    pub nboot: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Panel {
    Interaction,
    MainA,
    MainB,
    /// B1 - B2 at each level of A.
    Simple,
    All,
}

#[derive(Debug, Args)]
pub struct PlotdataArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub boot: BootArgs,
    #[arg(long, value_enum, default_value_t = Panel::Interaction)]
    pub panel: Panel,
    #[arg(long)]
    pub output: Option<PathBuf>,
}
