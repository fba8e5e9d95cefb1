//! Shared fixtures for the benchmarks.

use qshift_core::{generate, DistributionSpec, FactorialSample, Population, RngStream};

pub fn sample(p: Population, n: usize, seed: u64) -> Vec<f64> {
    generate(&DistributionSpec::new(p), n, RngStream::new(seed)).unwrap()
}

/// Four normal cells of size `n`.
pub fn normal_design(n: usize) -> FactorialSample {
    FactorialSample::from_flat(std::array::from_fn(|c| {
        sample(Population::Normal, n, c as u64)
    }))
    .unwrap()
}
