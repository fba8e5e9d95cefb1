//! Simulation populations and the moment-ratio kurtosis diagnostic.
//!
//! Normal deviates come from `rand_distr`'s ziggurat sampler driven by a
//! ChaCha8 stream, which is deterministic per stream address.
//!
//! The mixed normal is the contaminated normal `.9 Φ(x) + .1 Φ(x/10)`: a draw
//! is `N(0, 1)` with probability .9 and `N(0, 10²)` otherwise. The mixed
//! lognormal applies the same contamination to `exp(Z)`. Beta-binomial draws
//! use `nbin - 1` trials so the support is exactly `{0, ..., nbin - 1}`.

use std::fmt;

use rand::Rng;
use rand_distr::{Beta, Binomial, Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::rng::RngStream;

const CONTAMINATION_PROB: f64 = 0.1;
const CONTAMINATION_SCALE: f64 = 10.0;

/// Human-readable record of the mixture forms, for run metadata.
pub const MIXED_NORMAL_FORM: &str = "0.9*N(0,1) + 0.1*N(0,10^2)";
pub const MIXED_LOGNORMAL_FORM: &str = "exp(Z) scaled by 10 with probability 0.1";
pub const BETA_BINOMIAL_FORM: &str =
    "p ~ Beta(r, s); X ~ Binomial(nbin - 1, p); support {0..nbin-1}";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum Population {
    Normal,
    MixedNormal,
    Lognormal,
    MixedLognormal,
    Poisson {
        mean: f64,
    },
    BetaBinomial {
        r: f64,
        s: f64,
        nbin: u32,
    },
    #[serde(rename = "g_and_h")]
    GAndH {
        g: f64,
        h: f64,
    },
}

/// A population plus a location shift added after generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    #[serde(flatten)]
    pub population: Population,
    #[serde(default)]
    pub shift: f64,
}

impl From<Population> for DistributionSpec {
    fn from(population: Population) -> Self {
        DistributionSpec {
            population,
            shift: 0.0,
        }
    }
}

impl DistributionSpec {
    pub fn new(population: Population) -> Self {
        population.into()
    }

    pub fn shifted(self, shift: f64) -> Self {
        DistributionSpec { shift, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.shift.is_finite() {
            return Err(Error::invalid(format!(
                "shift {} is not finite",
                self.shift
            )));
        }
        match self.population {
            Population::Poisson { mean } if !(mean > 0.0 && mean.is_finite()) => Err(
                Error::invalid(format!("Poisson mean must be positive, got {mean}")),
            ),
            Population::BetaBinomial { r, s, nbin } => {
                if !(r > 0.0 && s > 0.0 && r.is_finite() && s.is_finite()) {
                    Err(Error::invalid(format!(
                        "beta-binomial needs r, s > 0, got r={r}, s={s}"
                    )))
                } else if nbin < 2 {
                    Err(Error::invalid(format!(
                        "beta-binomial needs nbin >= 2, got {nbin}"
                    )))
                } else {
                    Ok(())
                }
            }
            Population::GAndH { g, h } if !(g.is_finite() && h.is_finite() && h >= 0.0) => {
                Err(Error::invalid(format!(
                    "g-and-h needs finite g and h >= 0, got g={g}, h={h}"
                )))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.population {
            Population::Normal => write!(f, "normal")?,
            Population::MixedNormal => write!(f, "mixed_normal")?,
            Population::Lognormal => write!(f, "lognormal")?,
            Population::MixedLognormal => write!(f, "mixed_lognormal")?,
            Population::Poisson { mean } => write!(f, "poisson(mean={mean})")?,
            Population::BetaBinomial { r, s, nbin } => {
                write!(f, "beta_binomial(r={r},s={s},nbin={nbin})")?
            }
            Population::GAndH { g, h } => write!(f, "g_and_h(g={g},h={h})")?,
        }
        if self.shift != 0.0 {
            write!(f, "{:+}", self.shift)?;
        }
        Ok(())
    }
}

#[inline]
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

#[inline]
fn contamination<R: Rng>(rng: &mut R) -> f64 {
    if rng.random::<f64>() < CONTAMINATION_PROB {
        CONTAMINATION_SCALE
    } else {
        1.0
    }
}

/// `n` i.i.d. draws from `spec`, reproducible for a given stream.
pub fn generate(spec: &DistributionSpec, n: usize, stream: RngStream) -> Result<Vec<f64>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::invalid("cannot generate an empty sample"));
    }
    let mut rng = stream.rng();
    let rng = &mut rng;
    let draws: Vec<f64> = match spec.population {
        Population::Normal => (0..n).map(|_| standard_normal(rng)).collect(),
        Population::MixedNormal => (0..n)
            .map(|_| {
                let scale = contamination(rng);
                scale * standard_normal(rng)
            })
            .collect(),
        Population::Lognormal => (0..n).map(|_| standard_normal(rng).exp()).collect(),
        Population::MixedLognormal => (0..n)
            .map(|_| {
                let scale = contamination(rng);
                scale * standard_normal(rng).exp()
            })
            .collect(),
        Population::Poisson { mean } => {
            let d = Poisson::new(mean).map_err(|e| Error::invalid(format!("Poisson: {e}")))?;
            (0..n).map(|_| d.sample(rng)).collect()
        }
        Population::BetaBinomial { r, s, nbin } => {
            let beta = Beta::new(r, s).map_err(|e| Error::invalid(format!("beta: {e}")))?;
            let trials = u64::from(nbin - 1);
            (0..n)
                .map(|_| {
                    let p: f64 = beta.sample(rng);
                    Binomial::new(trials, p.clamp(0.0, 1.0))
                        .map(|b| b.sample(rng) as f64)
                        .map_err(|e| Error::invalid(format!("binomial: {e}")))
                })
                .collect::<Result<_>>()?
        }
        Population::GAndH { g, h } => (0..n)
            .map(|_| {
                let z = standard_normal(rng);
                let tail = (h * z * z / 2.0).exp();
                if g == 0.0 {
                    z * tail
                } else {
                    (g * z).exp_m1() / g * tail
                }
            })
            .collect(),
    };
    Ok(draws.into_iter().map(|x| x + spec.shift).collect())
}

/// Non-excess moment-ratio kurtosis `m4 / m2²`.
pub fn sample_kurtosis(x: &[f64]) -> Result<f64> {
    if x.len() < 4 {
        return Err(Error::invalid(format!(
            "kurtosis needs n >= 4, got {}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("kurtosis input contains non-finite values"));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (m2, m4) = x.iter().fold((0.0, 0.0), |(m2, m4), &v| {
        let d2 = (v - mean) * (v - mean);
        (m2 + d2, m4 + d2 * d2)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    if m2 == 0.0 {
        return Err(Error::invalid("kurtosis of a sample with zero variance"));
    }
    Ok(m4 / (m2 * m2))
}

/// Sample skewness `m3 / m2^{3/2}`.
pub fn sample_skewness(x: &[f64]) -> Result<f64> {
    if x.len() < 3 {
        return Err(Error::invalid(format!(
            "skewness needs n >= 3, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (m2, m3) = x.iter().fold((0.0, 0.0), |(m2, m3), &v| {
        let d = v - mean;
        (m2 + d * d, m3 + d * d * d)
    });
    let (m2, m3) = (m2 / n, m3 / n);
    if m2 == 0.0 {
        return Err(Error::invalid("skewness of a sample with zero variance"));
    }
    Ok(m3 / m2.powf(1.5))
}

/// Population kurtosis of the standard lognormal, `e⁴ + 2e³ + 3e² - 3`.
pub fn lognormal_kurtosis() -> f64 {
    let e2 = 2f64.exp();
    e2 * e2 + 2.0 * e2 * 1f64.exp() + 3.0 * e2 - 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draw(p: Population, n: usize, seed: u64) -> Vec<f64> {
        generate(&p.into(), n, RngStream::new(seed)).unwrap()
    }

    fn mean(x: &[f64]) -> f64 {
        x.iter().sum::<f64>() / x.len() as f64
    }

    #[test]
    fn parameter_validation() {
        let bad = [
            Population::Poisson { mean: 0.0 },
            Population::BetaBinomial {
                r: 0.0,
                s: 9.0,
                nbin: 10,
            },
            Population::BetaBinomial {
                r: 1.0,
                s: 9.0,
                nbin: 1,
            },
            Population::GAndH { g: 0.2, h: -0.1 },
        ];
        for p in bad {
            assert!(generate(&p.into(), 5, RngStream::new(1)).is_err(), "{p:?}");
        }
        assert!(generate(&Population::Normal.into(), 0, RngStream::new(1)).is_err());
        let inf = DistributionSpec::new(Population::Normal).shifted(f64::INFINITY);
        assert!(generate(&inf, 3, RngStream::new(1)).is_err());
    }

    #[test]
    fn poisson_mean() {
        let m = mean(&draw(Population::Poisson { mean: 9.0 }, 10_000, 3));
        assert!((8.7..=9.3).contains(&m), "{m}");
    }

    #[test]
    fn g_and_h_zero_is_normal() {
        let x = draw(Population::GAndH { g: 0.0, h: 0.0 }, 10_000, 4);
        let y = draw(Population::Normal, 10_000, 4);
        assert_eq!(x, y);
        assert!(mean(&x).abs() < 0.05);
    }

    #[test]
    fn beta_binomial_support() {
        let x = draw(
            Population::BetaBinomial {
                r: 1.0,
                s: 9.0,
                nbin: 10,
            },
            5_000,
            5,
        );
        assert!(x
            .iter()
            .all(|v| v.fract() == 0.0 && (0.0..=9.0).contains(v)));
        // P(X = 0) = B(1, 18) / B(1, 9) = 1/2
        let zeros = x.iter().filter(|&&v| v == 0.0).count() as f64 / x.len() as f64;
        assert!((zeros - 0.5).abs() < 0.03, "{zeros}");
    }

    #[test]
    fn shift_equivariance() {
        for p in [
            Population::Normal,
            Population::MixedLognormal,
            Population::Poisson { mean: 9.0 },
            Population::GAndH { g: 0.5, h: 0.2 },
        ] {
            let base = generate(&p.into(), 200, RngStream::new(8)).unwrap();
            let moved = generate(
                &DistributionSpec::new(p).shifted(2.5),
                200,
                RngStream::new(8),
            )
            .unwrap();
            for (a, b) in base.iter().zip(&moved) {
                assert_eq!(a + 2.5, *b);
            }
        }
    }

    #[test]
    fn determinism() {
        let p = Population::MixedNormal;
        assert_eq!(draw(p, 100, 77), draw(p, 100, 77));
        assert_ne!(draw(p, 100, 77), draw(p, 100, 78));
    }

    #[test]
    fn kurtosis_basics() {
        assert!(sample_kurtosis(&[1.0, 2.0, 3.0]).is_err());
        assert!(sample_kurtosis(&[2.0; 10]).is_err());
        // symmetric two-point distribution has kurtosis 1
        assert!((sample_kurtosis(&[-1.0, 1.0, -1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((lognormal_kurtosis() - 113.936).abs() < 1e-3);
    }

    #[test]
    fn spec_display() {
        let s = DistributionSpec::new(Population::BetaBinomial {
            r: 1.0,
            s: 9.0,
            nbin: 10,
        })
        .shifted(0.5);
        assert_eq!(s.to_string(), "beta_binomial(r=1,s=9,nbin=10)+0.5");
        assert_eq!(
            DistributionSpec::new(Population::Normal).to_string(),
            "normal"
        );
    }
}
