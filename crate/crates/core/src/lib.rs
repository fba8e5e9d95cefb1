//! Quantile shift inference for 2x2 between-subjects factorial designs.
//!
//! Two families of tests are provided:
//!
//! * [`decinter`]: interaction and main-effect contrasts of cell quantiles
//!   (deciles by default), e.g. `θ11 - θ12 - θ21 + θ22` for each level `q`.
//! * [`iband`]: compares quantiles of the all-pairwise-difference
//!   distributions at the two levels of factor A.
//!
//! Both use a percentile bootstrap with Harrell-Davis (default) or type-7
//! quantiles, a tie-aware sign-count p-value and Hochberg or
//! Benjamini-Hochberg adjustment across the quantile family. The [`sim`]
//! module estimates familywise error and power of these methods against the
//! classic ANOVA F test.

pub mod anova;
pub mod bootstrap;
pub mod contrast;
pub mod distributions;
pub mod error;
pub mod multcomp;
pub mod pairwise;
pub mod quantile;
pub mod rng;
pub mod sim;
pub mod special;

pub use anova::{anova_f_test, AnovaTable};
pub use bootstrap::{
    bootstrap_statistic, percentile_ci, resample, signed_pvalue, statistic_fn, BootstrapConfig,
    BootstrapDistribution, InferenceResult, ReplicateStatistic,
};
pub use contrast::{
    contrast_value, decinter, ContrastKind, ContrastValue, FactorLabels, FactorialSample,
    QuantileTestRow,
};
pub use distributions::{generate, sample_kurtosis, DistributionSpec, Population};
pub use error::{Error, Result};
pub use multcomp::{
    bh_adjust, bh_reject, hochberg_adjust, hochberg_reject, CorrectionMethod, PValueFamily,
};
pub use pairwise::{
    iband, median_diff_test, pairwise_differences, ph_by_level, ph_probability, PairwiseDiffs,
    PhEstimate,
};
pub use quantile::{
    hd_quantile, hd_weights, type7_quantile, Estimator, HdWeights, QuantileLevel, QuantilePlan,
    SortedSample,
};
pub use rng::RngStream;
pub use sim::{run_condition, run_fwer, run_power, sweep, Method, SimCondition, SimulationReport};
pub use special::regularized_incomplete_beta;
