//! `decinter`, `iband` and `plotdata`.

use std::io::Write;

use qshift_core::quantile::QuantilePlan;
use qshift_core::{
    bootstrap_statistic, decinter, iband, ph_by_level, statistic_fn, BootstrapConfig, ContrastKind,
    FactorialSample, InferenceResult, QuantileLevel,
};

use crate::args::{DataArgs, DecinterArgs, Format, IbandArgs, Panel, PlotdataArgs};
use crate::error::{data, Result};
use crate::input::{LevelOrder, LongFormatTable};
use crate::output::{factor_info, num, AnalysisReport, SCHEMA_VERSION};

pub struct Loaded {
    pub table: LongFormatTable,
    pub sample: FactorialSample,
}

pub fn load(args: &DataArgs) -> Result<Loaded> {
    let order = args
        .level_order
        .as_deref()
        .map(LevelOrder::parse)
        .transpose()?;
    let table = LongFormatTable::read(&args.input, &args.factor_a, &args.factor_b, &args.value)?;
    let sample = table.to_sample(order.as_ref())?;
    log::info!(
        "cells {:?} (A1 = {}, A2 = {}, B1 = {}, B2 = {})",
        sample.sizes(),
        sample.labels().a[0],
        sample.labels().a[1],
        sample.labels().b[0],
        sample.labels().b[1]
    );
    Ok(Loaded { table, sample })
}

fn report(
    command: &str,
    loaded: &Loaded,
    config: &BootstrapConfig,
    contrast: ContrastKind,
    correction: qshift_core::CorrectionMethod,
    rows: Vec<qshift_core::QuantileTestRow>,
) -> AnalysisReport {
    let (factor_a, factor_b) = factor_info(&loaded.table.columns, loaded.sample.labels());
    AnalysisReport {
        schema_version: SCHEMA_VERSION,
        command: command.into(),
        factor_a,
        factor_b,
        value_column: loaded.table.columns[2].clone(),
        contrast,
        estimator: config.estimator,
        correction,
        nboot: config.nboot,
        alpha: config.alpha,
        seed: config.seed,
        cell_sizes: loaded.sample.sizes(),
        dropped_rows: loaded.table.dropped,
        rows,
        ph: None,
    }
}

fn emit(report: &AnalysisReport, format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Tsv => report.write_tsv(out),
        Format::Json => report.write_json(out),
    }
}

pub fn decinter_report(args: &DecinterArgs) -> Result<AnalysisReport> {
    let config = args.boot.config(QuantileLevel::deciles())?;
    let loaded = load(&args.data)?;
    let contrast = args.contrast.into();
    let correction = args.boot.correction.into();
    log::info!("decinter: {} bootstrap samples", config.nboot);
    let rows = decinter(&loaded.sample, contrast, &config, correction).map_err(data)?;
    Ok(report(
        "decinter", &loaded, &config, contrast, correction, rows,
    ))
}

pub fn cmd_decinter(args: &DecinterArgs, out: &mut dyn Write) -> Result<()> {
    emit(&decinter_report(args)?, args.format, out)
}

pub fn iband_report(args: &IbandArgs) -> Result<AnalysisReport> {
    let config = args.boot.config(QuantileLevel::quartiles_and_extremes())?;
    let loaded = load(&args.data)?;
    let correction = args.boot.correction.into();
    log::info!("iband: {} bootstrap samples", config.nboot);
    let rows = iband(&loaded.sample, &config, correction).map_err(data)?;
    let mut r = report(
        "iband",
        &loaded,
        &config,
        ContrastKind::Interaction,
        correction,
        rows,
    );
    if args.ph {
        let (p1, p2) = ph_by_level(&loaded.sample).map_err(data)?;
        r.ph = Some([p1.0, p2.0]);
    }
    Ok(r)
}

pub fn cmd_iband(args: &IbandArgs, out: &mut dyn Write) -> Result<()> {
    emit(&iband_report(args)?, args.format, out)
}

/// One point of a shift-function plot.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotPoint {
    pub quantile: f64,
    pub x: f64,
    pub dif: f64,
    pub ci_low: f64,
    pub ci_up: f64,
    pub panel: String,
}

fn pooled_quantiles(config: &BootstrapConfig, parts: &[&[f64]]) -> Result<Vec<f64>> {
    let mut pooled: Vec<f64> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    pooled.sort_by(f64::total_cmp);
    let plan =
        QuantilePlan::new(config.estimator, &config.quantiles, [pooled.len()]).map_err(data)?;
    plan.estimate(&pooled).map_err(data)
}

/// `B1 - B2` at one level of A, with its own two-sample bootstrap.
fn simple_effect(
    config: &BootstrapConfig,
    b1: &[f64],
    b2: &[f64],
    panel: String,
) -> Result<Vec<PlotPoint>> {
    let plan = QuantilePlan::new(config.estimator, &config.quantiles, [b1.len(), b2.len()])
        .map_err(data)?;
    let sorted = |x: &[f64]| {
        let mut v = x.to_vec();
        v.sort_by(f64::total_cmp);
        v
    };
    let q1 = plan.estimate(&sorted(b1)).map_err(data)?;
    let q2 = plan.estimate(&sorted(b2)).map_err(data)?;
    let width = config.quantiles.len();
    let stat = statistic_fn(width, |cells: &mut [Vec<f64>], out: &mut [f64]| {
        cells
            .iter_mut()
            .for_each(|c| c.sort_unstable_by(f64::total_cmp));
        let (Ok(a), Ok(b)) = (plan.estimate(&cells[0]), plan.estimate(&cells[1])) else {
            out.fill(f64::NAN);
            return;
        };
        for (o, (a, b)) in out.iter_mut().zip(a.iter().zip(&b)) {
            *o = a - b;
        }
    });
    let dists = bootstrap_statistic(&[b1, b2], &stat, config).map_err(data)?;
    (0..width)
        .map(|k| {
            let inf = InferenceResult::from_distribution(q1[k] - q2[k], &dists[k], config.alpha)
                .map_err(data)?;
            Ok(PlotPoint {
                quantile: config.quantiles[k].get(),
                x: q1[k],
                dif: inf.estimate,
                ci_low: inf.ci_low,
                ci_up: inf.ci_high,
                panel: panel.clone(),
            })
        })
        .collect()
}

fn contrast_points(
    sample: &FactorialSample,
    config: &BootstrapConfig,
    kind: ContrastKind,
) -> Result<Vec<PlotPoint>> {
    let rows = decinter(sample, kind, config, qshift_core::CorrectionMethod::None).map_err(data)?;
    let [c11, c12, c21, c22] = sample.flat();
    let point = |r: &qshift_core::QuantileTestRow, x: f64, panel: &str| PlotPoint {
        quantile: r.q.get(),
        x,
        dif: r.dif,
        ci_low: r.ci_low,
        ci_up: r.ci_high,
        panel: panel.into(),
    };
    let (name, level1): (&str, [&[f64]; 2]) = match kind {
        ContrastKind::Interaction => {
            let pooled = pooled_quantiles(config, &[c11, c12, c21, c22])?;
            return Ok(rows
                .iter()
                .zip(pooled)
                .map(|(r, x)| point(r, x, "interaction"))
                .collect());
        }
        ContrastKind::MainA => ("main-a", [c11, c12]),
        ContrastKind::MainB => ("main-b", [c11, c21]),
    };
    let pooled = pooled_quantiles(config, &level1)?;
    let mut points: Vec<PlotPoint> = rows
        .iter()
        .zip(pooled)
        .map(|(r, x)| point(r, x, &format!("{name}:pooled")))
        .collect();
    // est_lev1 of a main effect is the average of the two level-1 cell quantiles
    points.extend(
        rows.iter()
            .map(|r| point(r, r.est_lev1, &format!("{name}:averaged"))),
    );
    Ok(points)
}

pub fn plot_points(args: &PlotdataArgs) -> Result<Vec<PlotPoint>> {
    let config = args.boot.config(QuantileLevel::deciles())?;
    let loaded = load(&args.data)?;
    let s = &loaded.sample;
    let labels = s.labels().clone();
    let simple = || -> Result<Vec<PlotPoint>> {
        let mut v = simple_effect(
            &config,
            s.cell(0, 0),
            s.cell(0, 1),
            format!("simple:{}", labels.a[0]),
        )?;
        v.extend(simple_effect(
            &config,
            s.cell(1, 0),
            s.cell(1, 1),
            format!("simple:{}", labels.a[1]),
        )?);
        Ok(v)
    };
    match args.panel {
        Panel::Interaction => contrast_points(s, &config, ContrastKind::Interaction),
        Panel::MainA => contrast_points(s, &config, ContrastKind::MainA),
        Panel::MainB => contrast_points(s, &config, ContrastKind::MainB),
        Panel::Simple => simple(),
        Panel::All => {
            let mut v = simple()?;
            v.extend(contrast_points(s, &config, ContrastKind::MainA)?);
            v.extend(contrast_points(s, &config, ContrastKind::MainB)?);
            v.extend(contrast_points(s, &config, ContrastKind::Interaction)?);
            Ok(v)
        }
    }
}

pub fn cmd_plotdata(args: &PlotdataArgs, out: &mut dyn Write) -> Result<()> {
    let points = plot_points(args)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["quantile", "x", "dif", "ci.low", "ci.up", "panel"])?;
    for p in &points {
        w.write_record([
            num(p.quantile),
            num(p.x),
            num(p.dif),
            num(p.ci_low),
            num(p.ci_up),
            p.panel.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
