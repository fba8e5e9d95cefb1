//! Brute-force references that share no code with the library.
//!
//! Beta probabilities come from adaptive Gauss-Kronrod integration of the
//! unnormalized density `u^(a-1) (1-u)^(b-1)`; the normalizing constant is the
//! integral over `[0, 1]` computed the same way, so no gamma function is
//! involved. Endpoint singularities (`a < 1` or `b < 1`) are removed with the
//! substitution `u = t^(1/a)`.

#![allow(dead_code)]

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let pair = f(c - x) + f(c + x);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h)
}

/// Adaptive bisection until each panel's Kronrod-Gauss gap is below `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> f64 {
    fn go<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64, depth: u32) -> f64 {
        let (val, err) = gk15(f, lo, hi);
        if err <= tol || err <= 50.0 * f64::EPSILON * val.abs() || depth == 0 {
            return val;
        }
        let mid = 0.5 * (lo + hi);
        go(f, lo, mid, tol / 2.0, depth - 1) + go(f, mid, hi, tol / 2.0, depth - 1)
    }
    go(f, lo, hi, tol, 40)
}

/// Unnormalized Beta mass on `[lo, hi]`, scaled by the density at its mode.
fn beta_mass(lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    // log-density relative to its maximum on [0, 1] (or 0 when unbounded)
    let log_peak = if a > 1.0 && b > 1.0 {
        let m = (a - 1.0) / (a + b - 2.0);
        (a - 1.0) * m.ln() + (b - 1.0) * (1.0 - m).ln()
    } else {
        0.0
    };
    let tol = 1e-15;

    // split at the midpoint so each piece touches at most one endpoint
    if lo < 0.5 && hi > 0.5 {
        return beta_mass(lo, 0.5, a, b) + beta_mass(0.5, hi, a, b);
    }
    if lo == 0.0 && a < 1.0 {
        // u = t^(1/a): ∫ u^(a-1)(1-u)^(b-1) du = (1/a) ∫_0^{hi^a} (1 - t^(1/a))^(b-1) dt
        let f = |t: f64| {
            let u = t.powf(1.0 / a);
            ((b - 1.0) * (-u).ln_1p() - log_peak).exp() / a
        };
        return integrate(&f, 0.0, hi.powf(a), tol);
    }
    if hi == 1.0 && b < 1.0 {
        let f = |t: f64| {
            let v = t.powf(1.0 / b);
            ((a - 1.0) * (-v).ln_1p() - log_peak).exp() / b
        };
        return integrate(&f, 0.0, (1.0 - lo).powf(b), tol);
    }
    let f = |u: f64| {
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        ((a - 1.0) * u.ln() + (b - 1.0) * (-u).ln_1p() - log_peak).exp()
    };
    integrate(&f, lo, hi, tol)
}

/// `I_x(a, b)` by quadrature.
pub fn beta_cdf(x: f64, a: f64, b: f64) -> f64 {
    beta_mass(0.0, x, a, b) / beta_mass(0.0, 1.0, a, b)
}

/// Harrell-Davis weights, each one integrated directly over its interval.
pub fn hd_weights(n: usize, q: f64) -> Vec<f64> {
    let a = (n as f64 + 1.0) * q;
    let b = (n as f64 + 1.0) * (1.0 - q);
    let nf = n as f64;
    let masses: Vec<f64> = (1..=n)
        .map(|i| beta_mass((i - 1) as f64 / nf, i as f64 / nf, a, b))
        .collect();
    let total: f64 = masses.iter().sum();
    masses.into_iter().map(|m| m / total).collect()
}

pub fn hd_quantile(values: &[f64], q: f64) -> f64 {
    let mut x = values.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    hd_weights(x.len(), q)
        .iter()
        .zip(&x)
        .map(|(w, v)| w * v)
        .sum()
}

/// Two-way ANOVA F statistics via total and between-cell sums of squares.
///
/// Returns `(F_A, F_B, F_AB)` for a balanced design given as four cells.
pub fn anova_f(cells: [&[f64]; 4]) -> (f64, f64, f64) {
    let n = cells[0].len() as f64;
    let all: Vec<f64> = cells.iter().flat_map(|c| c.iter().copied()).collect();
    let grand = all.iter().sum::<f64>() / all.len() as f64;
    let ss_total: f64 = all.iter().map(|x| (x - grand) * (x - grand)).sum();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let cell_means: Vec<f64> = cells.iter().map(|c| mean(c)).collect();
    let ss_cells: f64 = cell_means
        .iter()
        .map(|m| n * (m - grand) * (m - grand))
        .sum();
    // marginal sums of squares from pooled observations of each level
    let pooled = |i: usize, j: usize| -> Vec<f64> {
        cells[i].iter().chain(cells[j].iter()).copied().collect()
    };
    let ss_marginal = |x: Vec<f64>, y: Vec<f64>| {
        let (mx, my) = (mean(&x), mean(&y));
        x.len() as f64 * (mx - grand) * (mx - grand) + y.len() as f64 * (my - grand) * (my - grand)
    };
    let ss_a = ss_marginal(pooled(0, 1), pooled(2, 3));
    let ss_b = ss_marginal(pooled(0, 2), pooled(1, 3));
    let ss_ab = ss_cells - ss_a - ss_b;
    let ss_e = ss_total - ss_cells;
    let mse = ss_e / (4.0 * (n - 1.0));
    (ss_a / mse, ss_b / mse, ss_ab / mse)
}
