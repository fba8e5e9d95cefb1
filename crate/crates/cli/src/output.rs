//! Result tables: TSV for reading, JSON for machines.

use std::io::Write;

use qshift_core::{ContrastKind, CorrectionMethod, Estimator, FactorLabels, QuantileTestRow};
use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

pub const TSV_HEADER: [&str; 8] = [
    "Quant",
    "Est.Lev 1",
    "Est.Lev 2",
    "Dif",
    "ci.low",
    "ci.up",
    "p-value",
    "p.adj",
];

/// Formats with at least six significant digits.
pub fn num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 {
            "0.00000".into()
        } else {
            x.to_string()
        };
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        format!("{:.*}", (5 - mag).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorInfo {
    pub column: String,
    /// Level 1 and level 2, in analysis order.
    pub levels: [String; 2],
}

/// Everything `decinter` and `iband` report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub command: String,
    pub factor_a: FactorInfo,
    pub factor_b: FactorInfo,
    pub value_column: String,
    pub contrast: ContrastKind,
    pub estimator: Estimator,
    pub correction: CorrectionMethod,
    pub nboot: usize,
    pub alpha: f64,
    pub seed: u64,
    /// `[A1B1, A1B2, A2B1, A2B2]`
    pub cell_sizes: [usize; 4],
    pub dropped_rows: usize,
    pub rows: Vec<QuantileTestRow>,
    /// `P(X < Y)` between B1 and B2 at A1 and at A2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ph: Option<[f64; 2]>,
}

pub fn factor_info(columns: &[String; 3], labels: &FactorLabels) -> (FactorInfo, FactorInfo) {
    (
        FactorInfo {
            column: columns[0].clone(),
            levels: labels.a.clone(),
        },
        FactorInfo {
            column: columns[1].clone(),
            levels: labels.b.clone(),
        },
    )
}

impl AnalysisReport {
    pub fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut *out, self)?;
        writeln!(out)?;
        Ok(())
    }

    /// Orientation comments, the fixed header, then one line per quantile.
    pub fn write_tsv(&self, out: &mut dyn Write) -> Result<()> {
        let (a, b) = (&self.factor_a, &self.factor_b);
        writeln!(
            out,
            "# {} {}: A1 = {}, A2 = {}",
            self.command, a.column, a.levels[0], a.levels[1]
        )?;
        writeln!(
            out,
            "# {} {}: B1 = {}, B2 = {}",
            self.command, b.column, b.levels[0], b.levels[1]
        )?;
        writeln!(
            out,
            "# contrast = {}, estimator = {}, correction = {}, nboot = {}, seed = {}",
            self.contrast.short_name(),
            self.estimator.short_name(),
            self.correction.short_name(),
            self.nboot,
            self.seed
        )?;
        writeln!(out, "{}", TSV_HEADER.join("\t"))?;
        for r in &self.rows {
            let fields = [
                r.q.get(),
                r.est_lev1,
                r.est_lev2,
                r.dif,
                r.ci_low,
                r.ci_high,
                r.p_value,
                r.p_adjusted,
            ];
            let line: Vec<String> = fields.into_iter().map(num).collect();
            writeln!(out, "{}", line.join("\t"))?;
        }
        if let Some([p1, p2]) = self.ph {
            writeln!(
                out,
                "# ph A1 P({}<{}) = {}",
                b.levels[0],
                b.levels[1],
                num(p1)
            )?;
            writeln!(
                out,
                "# ph A2 P({}<{}) = {}",
                b.levels[0],
                b.levels[1],
                num(p2)
            )?;
        }
        Ok(())
    }
}
