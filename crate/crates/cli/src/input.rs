//! Long-format CSV ingestion.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use qshift_core::{FactorLabels, FactorialSample};

use crate::error::{data, usage, CliError, Result};

const MISSING: [&str; 6] = ["", "NA", "N/A", "NaN", "nan", "."];

fn is_missing(field: &str) -> bool {
    MISSING.contains(&field.trim())
}

/// One observation per row: `(factor A label, factor B label, value)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LongFormatTable {
    pub columns: [String; 3],
    pub rows: Vec<(String, String, f64)>,
    /// Rows skipped because a field was missing.
    pub dropped: usize,
}

/// Explicit `[A1, A2, B1, B2]` level order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelOrder {
    pub a: [String; 2],
    pub b: [String; 2],
}

impl LevelOrder {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        match parts.as_slice() {
            [a1, a2, b1, b2] if a1 != a2 && b1 != b2 => Ok(LevelOrder {
                a: [a1.to_string(), a2.to_string()],
                b: [b1.to_string(), b2.to_string()],
            }),
            _ => Err(usage(format!(
                "--level-order expects four labels \"A1,A2,B1,B2\" with distinct levels per factor, got \"{s}\""
            ))),
        }
    }
}

impl LongFormatTable {
    pub fn read(path: &Path, factor_a: &str, factor_b: &str, value: &str) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| data(format!("cannot open {}: {e}", path.display())))?;
        Self::from_reader(file, factor_a, factor_b, value).map_err(|e| match e {
            CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn from_reader<R: Read>(
        reader: R,
        factor_a: &str,
        factor_b: &str,
        value: &str,
    ) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = csv
            .headers()
            .map_err(|e| data(format!("cannot read header: {e}")))?
            .clone();
        let find = |name: &str| {
            header.iter().position(|h| h == name).ok_or_else(|| {
                let found: Vec<&str> = header.iter().collect();
                data(format!("column '{name}' not found; header has {found:?}"))
            })
        };
        let idx = [find(factor_a)?, find(factor_b)?, find(value)?];

        let mut rows = Vec::new();
        let mut dropped = 0;
        for record in csv.records() {
            let record = record.map_err(|e| data(format!("malformed CSV: {e}")))?;
            let line = record.position().map_or(0, |p| p.line());
            let fields = idx.map(|i| record.get(i).unwrap_or(""));
            if fields.iter().any(|f| is_missing(f)) {
                dropped += 1;
                continue;
            }
            let v: f64 = fields[2].parse().map_err(|_| {
                data(format!(
                    "line {line}, column '{value}': '{}' is not a number",
                    fields[2]
                ))
            })?;
            if !v.is_finite() {
                return Err(data(format!(
                    "line {line}, column '{value}': value {v} is not finite"
                )));
            }
            rows.push((fields[0].to_string(), fields[1].to_string(), v));
        }
        if dropped > 0 {
            log::warn!("dropped {dropped} row(s) with missing values");
        }
        Ok(LongFormatTable {
            columns: [factor_a.into(), factor_b.into(), value.into()],
            rows,
            dropped,
        })
    }

    fn levels(&self, which: usize) -> Result<[String; 2]> {
        let set: BTreeSet<&str> = self
            .rows
            .iter()
            .map(|r| {
                if which == 0 {
                    r.0.as_str()
                } else {
                    r.1.as_str()
                }
            })
            .collect();
        let levels: Vec<&str> = set.into_iter().collect();
        match levels.as_slice() {
            [x, y] => Ok([x.to_string(), y.to_string()]),
            _ => Err(data(format!(
                "column '{}' must have exactly two levels, found {}: {levels:?}",
                self.columns[which],
                levels.len()
            ))),
        }
    }

    /// Level labels in analysis order: lexicographic unless `order` is given.
    pub fn labels(&self, order: Option<&LevelOrder>) -> Result<FactorLabels> {
        let a = self.levels(0)?;
        let b = self.levels(1)?;
        let Some(order) = order else {
            return Ok(FactorLabels { a, b });
        };
        let same = |want: &[String; 2], have: &[String; 2]| {
            let mut w = want.clone();
            w.sort();
            &w == have
        };
        if !same(&order.a, &a) {
            return Err(usage(format!(
                "--level-order lists {:?} for '{}' but the data has {a:?}",
                order.a, self.columns[0]
            )));
        }
        if !same(&order.b, &b) {
            return Err(usage(format!(
                "--level-order lists {:?} for '{}' but the data has {b:?}",
                order.b, self.columns[1]
            )));
        }
        Ok(FactorLabels {
            a: order.a.clone(),
            b: order.b.clone(),
        })
    }

    pub fn to_sample(&self, order: Option<&LevelOrder>) -> Result<FactorialSample> {
        let labels = self.labels(order)?;
        let mut cells: [[Vec<f64>; 2]; 2] = Default::default();
        for (a, b, v) in &self.rows {
            let j = usize::from(a == &labels.a[1]);
            let k = usize::from(b == &labels.b[1]);
            cells[j][k].push(*v);
        }
        FactorialSample::with_labels(cells, labels).map_err(data)
    }
}
