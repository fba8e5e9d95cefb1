//! Multiplicity control across a family of quantile tests.
//!
//! Both procedures scan p-values from largest to smallest. With `p_[k]` the
//! `k`-th largest of `C` values, Hochberg stops at the first `k` where
//! `p_[k] <= α/k`; Benjamini-Hochberg uses `p_[k] <= (C-k+1)α/C`. Everything
//! at or below the stopping p-value is rejected.
//!
//! The adjusted p-values are built from the same scaled quantities as the
//! stepwise decisions, so `adjusted <= α` agrees with the procedure exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionMethod {
    None,
    Hochberg,
    #[serde(rename = "bh", alias = "benjamini_hochberg")]
    BenjaminiHochberg,
}

impl CorrectionMethod {
    pub fn short_name(self) -> &'static str {
        match self {
            CorrectionMethod::None => "none",
            CorrectionMethod::Hochberg => "hochberg",
            CorrectionMethod::BenjaminiHochberg => "bh",
        }
    }

    pub fn adjust(self, p: &[f64]) -> Vec<f64> {
        match self {
            CorrectionMethod::None => p.to_vec(),
            CorrectionMethod::Hochberg => hochberg_adjust(p),
            CorrectionMethod::BenjaminiHochberg => bh_adjust(p),
        }
    }
}

/// A validated family of `C >= 1` p-values with a nominal level.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueFamily {
    p: Vec<f64>,
    alpha: f64,
}

impl PValueFamily {
    pub fn new(p: Vec<f64>, alpha: f64) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::invalid("p-value family is empty"));
        }
        if let Some(i) = p.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid(format!(
                "p-value {} at position {i} is outside [0, 1]",
                p[i]
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("alpha {alpha} is outside (0, 1)")));
        }
        Ok(PValueFamily { p, alpha })
    }

    pub fn p_values(&self) -> &[f64] {
        &self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Indices of `p` by ascending value; ties keep input order.
fn ascending_order(p: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..p.len()).collect();
    idx.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    idx
}

/// Hochberg multiplier for ascending rank `j` (1-based) among `c`.
#[inline]
fn hochberg_scaled(p: f64, j: usize, c: usize) -> f64 {
    (c - j + 1) as f64 * p
}

#[inline]
fn bh_scaled(p: f64, j: usize, c: usize) -> f64 {
    c as f64 * p / j as f64
}

/// Step-up adjustment: `adj_(j) = min_{i >= j} min(1, scaled(p_(i), i))`.
fn step_up_adjust(p: &[f64], scaled: fn(f64, usize, usize) -> f64) -> Vec<f64> {
    let c = p.len();
    let order = ascending_order(p);
    let mut out = vec![0.0; c];
    let mut running = 1.0f64;
    for (pos, &i) in order.iter().enumerate().rev() {
        running = running.min(scaled(p[i], pos + 1, c).min(1.0));
        out[i] = running;
    }
    out
}

/// Step-up rejection: find the largest ascending rank whose scaled p-value is
/// within `alpha` and reject everything at or below that p-value.
fn step_up_reject(family: &PValueFamily, scaled: fn(f64, usize, usize) -> f64) -> Vec<bool> {
    let p = &family.p;
    let c = p.len();
    let order = ascending_order(p);
    // descending scan, k = c - pos
    let cutoff = order
        .iter()
        .enumerate()
        .rev()
        .find(|&(pos, &i)| scaled(p[i], pos + 1, c) <= family.alpha)
        .map(|(_, &i)| p[i]);
    match cutoff {
        Some(cut) => p.iter().map(|&v| v <= cut).collect(),
        None => vec![false; c],
    }
}

pub fn hochberg_adjust(p: &[f64]) -> Vec<f64> {
    step_up_adjust(p, hochberg_scaled)
}

pub fn bh_adjust(p: &[f64]) -> Vec<f64> {
    step_up_adjust(p, bh_scaled)
}

pub fn hochberg_reject(family: &PValueFamily) -> Vec<bool> {
    step_up_reject(family, hochberg_scaled)
}

pub fn bh_reject(family: &PValueFamily) -> Vec<bool> {
    step_up_reject(family, bh_scaled)
}
