//! Monte Carlo checks. Each uses a fixed seed, so outcomes are deterministic;
//! bounds are set several standard errors away from the expected values.

use qshift_core::distributions::{
    generate, sample_kurtosis, sample_skewness, DistributionSpec, Population,
};
use qshift_core::quantile::{Estimator, QuantileLevel, QuantilePlan};
use qshift_core::sim::{run_condition, run_fwer, run_power, Method, SimCondition};
use qshift_core::{
    bootstrap_statistic, median_diff_test, pairwise_differences, percentile_ci, BootstrapConfig,
    ContrastKind, CorrectionMethod, RngStream,
};

fn draw(p: Population, n: usize, seed: u64) -> Vec<f64> {
    generate(&p.into(), n, RngStream::new(seed)).unwrap()
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn cells(p: Population) -> [DistributionSpec; 4] {
    [p.into(); 4]
}

#[test]
fn population_moments() {
    let x = draw(Population::Normal, 200_000, 1);
    assert!(mean(&x).abs() < 0.01);
    assert!((sample_kurtosis(&x).unwrap() - 3.0).abs() < 0.06);

    let x = draw(Population::MixedNormal, 1_000_000, 2);
    assert!(sample_skewness(&x).unwrap().abs() < 0.15);
    let var = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    assert!((var - 10.9).abs() < 0.3, "{var}");

    let x = draw(
        Population::BetaBinomial {
            r: 1.0,
            s: 9.0,
            nbin: 10,
        },
        200_000,
        3,
    );
    assert!((mean(&x) - 0.9).abs() < 0.015, "{}", mean(&x));
    assert!(x
        .iter()
        .all(|v| v.fract() == 0.0 && (0.0..=9.0).contains(v)));
    let zeros = x.iter().filter(|&&v| v == 0.0).count() as f64 / x.len() as f64;
    assert!((zeros - 0.5).abs() < 0.01, "{zeros}");

    let x = draw(
        Population::BetaBinomial {
            r: 9.0,
            s: 9.0,
            nbin: 10,
        },
        200_000,
        4,
    );
    assert!((mean(&x) - 4.5).abs() < 0.02);

    let x = draw(Population::Poisson { mean: 9.0 }, 200_000, 5);
    assert!((mean(&x) - 9.0).abs() < 0.03);

    let x = draw(Population::Lognormal, 200_000, 6);
    assert!((mean(&x) - 0.5f64.exp()).abs() < 0.03);
}

#[test]
fn g_and_h_limits() {
    let z = draw(Population::Normal, 1000, 9);
    assert_eq!(draw(Population::GAndH { g: 0.0, h: 0.0 }, 1000, 9), z);
    let skewed = draw(Population::GAndH { g: 0.5, h: 0.0 }, 200_000, 10);
    assert!(sample_skewness(&skewed).unwrap() > 1.0);
    let heavy = draw(Population::GAndH { g: 0.0, h: 0.2 }, 200_000, 11);
    assert!(sample_kurtosis(&heavy).unwrap() > 10.0);
}

#[test]
fn shift_is_added_after_generation() {
    let spec = DistributionSpec::new(Population::Poisson { mean: 9.0 }).shifted(2.5);
    let x = generate(&spec, 50, RngStream::new(4)).unwrap();
    let y = draw(Population::Poisson { mean: 9.0 }, 50, 4);
    assert!(x.iter().zip(&y).all(|(a, b)| a - b == 2.5));
}

#[test]
fn lognormal_kurtosis_is_usually_underestimated() {
    let below = (0..100)
        .filter(|&i| sample_kurtosis(&draw(Population::Lognormal, 5000, 100 + i)).unwrap() < 113.9)
        .count();
    assert!(below >= 60, "{below}");
}

#[test]
fn mixed_lognormal_has_extreme_kurtosis() {
    let mut k: Vec<f64> = (0..100)
        .map(|i| sample_kurtosis(&draw(Population::MixedLognormal, 1_000_000, 500 + i)).unwrap())
        .collect();
    k.sort_by(f64::total_cmp);
    let median = (k[49] + k[50]) / 2.0;
    assert!((150.0..=1500.0).contains(&median), "{median}");
    assert!(
        k[99] > 2.0 * k[0],
        "estimates should vary wildly: {} to {}",
        k[0],
        k[99]
    );
}

#[test]
fn percentile_interval_coverage() {
    // HD median difference of two N(0,1) samples; the true value is 0
    let half = [QuantileLevel::new(0.5).unwrap()];
    let plan = QuantilePlan::new(Estimator::HarrellDavis, &half, [30]).unwrap();
    let stat = qshift_core::statistic_fn(1, |c: &mut [Vec<f64>], out: &mut [f64]| {
        c.iter_mut().for_each(|v| v.sort_by(f64::total_cmp));
        let a = plan.estimate(&c[0]).unwrap()[0];
        let b = plan.estimate(&c[1]).unwrap()[0];
        out[0] = a - b;
    });
    let sims = 500;
    let covered = (0..sims)
        .filter(|&i| {
            let s = RngStream::new(77).index(i);
            let x = generate(&Population::Normal.into(), 30, s.index(0)).unwrap();
            let y = generate(&Population::Normal.into(), 30, s.index(1)).unwrap();
            let config = BootstrapConfig {
                nboot: 400,
                seed: i,
                parallel: false,
                ..Default::default()
            };
            let d = bootstrap_statistic(&[&x, &y], &stat, &config).unwrap();
            let (lo, hi) = percentile_ci(&d[0], 0.05).unwrap();
            lo <= 0.0 && 0.0 <= hi
        })
        .count();
    assert!(covered as f64 / sims as f64 >= 0.90, "{covered}/{sims}");
}

#[test]
fn median_difference_test_level() {
    let sims = 500;
    let rejections = (0..sims)
        .filter(|&i| {
            let s = RngStream::new(5150).index(i);
            let x = generate(&Population::Normal.into(), 30, s.index(0)).unwrap();
            let y = generate(&Population::Normal.into(), 30, s.index(1)).unwrap();
            let config = BootstrapConfig {
                nboot: 400,
                seed: i,
                parallel: false,
                ..Default::default()
            };
            median_diff_test(&x, &y, &config).unwrap().p_value <= 0.05
        })
        .count();
    let rate = rejections as f64 / sims as f64;
    assert!((0.02..=0.08).contains(&rate), "{rate}");
}

#[test]
fn difference_median_centred_under_the_null() {
    let half = [QuantileLevel::new(0.5).unwrap()];
    let plan = QuantilePlan::new(Estimator::HarrellDavis, &half, [900]).unwrap();
    let sims = 500;
    let total: f64 = (0..sims)
        .map(|i| {
            let s = RngStream::new(306).index(i);
            let x = generate(&Population::Normal.into(), 30, s.index(0)).unwrap();
            let y = generate(&Population::Normal.into(), 30, s.index(1)).unwrap();
            let mut d = pairwise_differences(&x, &y).unwrap().into_inner();
            d.sort_by(f64::total_cmp);
            plan.estimate(&d).unwrap()[0]
        })
        .sum();
    let mean = total / sims as f64;
    assert!(mean.abs() <= 0.05, "{mean}");
}

#[test]
fn main_effect_power() {
    let mut c = cells(Population::Normal);
    c[2] = c[2].shifted(5.0);
    c[3] = c[3].shifted(5.0);
    let cond = SimCondition {
        n_sims: 200,
        nboot: 400,
        seed: 8,
        ..SimCondition::new("main-a", c, 50, Method::DecinterHd, ContrastKind::MainA)
    };
    let r = run_power(&cond).unwrap();
    assert!(
        r.per_quantile_rates[4] >= 0.95,
        "{:?}",
        r.per_quantile_rates
    );
    assert!(r.rate >= 0.95);
    let mut interaction = cond.clone();
    interaction.contrast = ContrastKind::Interaction;
    let r = run_condition(&interaction).unwrap();
    assert!(r.rate <= 0.1, "{}", r.rate);
}

#[test]
fn bh_rejects_at_least_as_often_as_hochberg() {
    let mut c = cells(Population::Normal);
    c[3] = c[3].shifted(0.6);
    for method in [Method::DecinterHd, Method::IbandT7] {
        let base = SimCondition {
            n_sims: 150,
            nboot: 300,
            seed: 21,
            ..SimCondition::new("dominance", c, 25, method, ContrastKind::Interaction)
        };
        let bh = run_power(&base).unwrap();
        let hoch = run_power(&SimCondition {
            correction: CorrectionMethod::Hochberg,
            ..base.clone()
        })
        .unwrap();
        assert!(
            bh.rate >= hoch.rate,
            "{method:?}: {} < {}",
            bh.rate,
            hoch.rate
        );
        assert_eq!(bh.per_quantile_rates, hoch.per_quantile_rates);
    }
}

#[test]
fn per_decile_rates_settle_with_n() {
    let spread = |n: usize| {
        let cond = SimCondition {
            n_sims: 500,
            correction: CorrectionMethod::None,
            seed: 31,
            ..SimCondition::new(
                "n-grid",
                cells(Population::Normal),
                n,
                Method::DecinterHd,
                ContrastKind::Interaction,
            )
        };
        let r = run_fwer(&cond).unwrap();
        r.per_quantile_rates
            .iter()
            .map(|p| (p - 0.05).abs())
            .fold(0.0, f64::max)
    };
    let (small, large) = (spread(20), spread(100));
    assert!(large <= small + 0.01, "n=20: {small}, n=100: {large}");
    assert!(large < 0.04, "{large}");
}

#[test]
fn harrell_davis_keeps_power_under_ties() {
    let bb = cells(Population::BetaBinomial {
        r: 1.0,
        s: 9.0,
        nbin: 10,
    });
    let run = |method| {
        let cond = SimCondition {
            n_sims: 1000,
            correction: CorrectionMethod::None,
            seed: 41,
            ..SimCondition::new("ties", bb, 30, method, ContrastKind::Interaction)
        };
        run_fwer(&cond).unwrap()
    };
    let hd = run(Method::DecinterHd);
    let t7 = run(Method::DecinterT7);
    // the .4 to .6 deciles sit on heavily tied values
    for k in 3..6 {
        assert!(
            hd.per_quantile_rates[k] > t7.per_quantile_rates[k],
            "decile {}: {} vs {}",
            k + 1,
            hd.per_quantile_rates[k],
            t7.per_quantile_rates[k]
        );
    }
    assert!(hd.rate > t7.rate);
}
