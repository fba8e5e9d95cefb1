//! Balanced two-way fixed-effects ANOVA on means, the simulation baseline.

use serde::{Deserialize, Serialize};

use crate::contrast::{ContrastKind, FactorialSample};
use crate::error::{Error, Result};
use crate::special::f_sf;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable {
    pub ss_a: f64,
    pub ss_b: f64,
    pub ss_ab: f64,
    pub ss_error: f64,
    pub df_error: f64,
    pub f_a: f64,
    pub f_b: f64,
    pub f_ab: f64,
    pub p_a: f64,
    pub p_b: f64,
    pub p_ab: f64,
}

impl AnovaTable {
    pub fn p_for(&self, kind: ContrastKind) -> f64 {
        match kind {
            ContrastKind::Interaction => self.p_ab,
            ContrastKind::MainA => self.p_a,
            ContrastKind::MainB => self.p_b,
        }
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// F tests for both main effects and the interaction, each on `(1, 4(n-1))` df.
pub fn anova_f_test(data: &FactorialSample) -> Result<AnovaTable> {
    let n = data.balanced_n().ok_or_else(|| {
        Error::invalid(format!(
            "ANOVA needs equal cell sizes, got {:?}",
            data.sizes()
        ))
    })?;
    if n < 2 {
        return Err(Error::invalid(
            "ANOVA needs at least 2 observations per cell",
        ));
    }
    let cells = data.flat();
    let m = cells.map(mean);
    let grand = (m[0] + m[1] + m[2] + m[3]) / 4.0;
    let a = [(m[0] + m[1]) / 2.0, (m[2] + m[3]) / 2.0];
    let b = [(m[0] + m[2]) / 2.0, (m[1] + m[3]) / 2.0];

    let nf = n as f64;
    let ss_a = 2.0 * nf * a.iter().map(|v| (v - grand).powi(2)).sum::<f64>();
    let ss_b = 2.0 * nf * b.iter().map(|v| (v - grand).powi(2)).sum::<f64>();
    let ss_ab = nf
        * (0..4)
            .map(|c| (m[c] - a[c / 2] - b[c % 2] + grand).powi(2))
            .sum::<f64>();
    let ss_error: f64 = cells
        .iter()
        .zip(m)
        .map(|(cell, mc)| cell.iter().map(|x| (x - mc).powi(2)).sum::<f64>())
        .sum();

    let df_error = 4.0 * (nf - 1.0);
    let scale = cells
        .iter()
        .flat_map(|c| c.iter())
        .map(|x| (x - grand).powi(2))
        .sum::<f64>();
    if ss_error <= 1e-14 * scale || ss_error == 0.0 {
        return Err(Error::Degenerate("zero within-cell variance".into()));
    }
    let mse = ss_error / df_error;
    let (f_a, f_b, f_ab) = (ss_a / mse, ss_b / mse, ss_ab / mse);
    Ok(AnovaTable {
        ss_a,
        ss_b,
        ss_ab,
        ss_error,
        df_error,
        f_a,
        f_b,
        f_ab,
        p_a: f_sf(f_a, 1.0, df_error)?,
        p_b: f_sf(f_b, 1.0, df_error)?,
        p_ab: f_sf(f_ab, 1.0, df_error)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unbalanced_and_degenerate() {
        let unbalanced =
            FactorialSample::from_flat([vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0], vec![1.0, 3.0]])
                .unwrap();
        assert!(matches!(
            anova_f_test(&unbalanced),
            Err(Error::InvalidArgument(_))
        ));
        let tiny =
            FactorialSample::from_flat([vec![1.0], vec![2.0], vec![3.0], vec![4.0]]).unwrap();
        assert!(anova_f_test(&tiny).is_err());
        let flat =
            FactorialSample::from_flat([vec![1.0; 3], vec![2.0; 3], vec![5.0; 3], vec![1.0; 3]])
                .unwrap();
        assert!(matches!(anova_f_test(&flat), Err(Error::Degenerate(_))));
    }

    #[test]
    fn pure_interaction_pattern() {
        // cell means (1, 0, 0, 1) with unit spread: no main effects
        let cell = |m: f64| vec![m - 1.0, m, m + 1.0];
        let data =
            FactorialSample::from_flat([cell(1.0), cell(0.0), cell(0.0), cell(1.0)]).unwrap();
        let t = anova_f_test(&data).unwrap();
        assert!(t.ss_a.abs() < 1e-15 && t.ss_b.abs() < 1e-15);
        assert!((t.ss_ab - 3.0).abs() < 1e-12);
        assert!((t.ss_error - 8.0).abs() < 1e-12);
        assert!((t.f_ab - 3.0).abs() < 1e-12);
        assert_eq!(t.p_a, 1.0);
        assert_eq!(t.p_for(ContrastKind::Interaction), t.p_ab);
    }
}
