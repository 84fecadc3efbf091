//! Delimited plot-data tables: metrics, margin bands and latent
//! correlation heat maps.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::experiments::quantile_sorted;
use super::io::{write_forecasts_long, OriginForecast};
use crate::error::Result;
use crate::gibbs::PosteriorDraws;
use crate::scoring::{hpd_interval, MetricsReport};
use crate::stationary::implied_functionals;

/// Quantile levels of the margin bands.
pub const BAND_LEVELS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

fn report_note<W: Write>(w: &mut W, report: &MetricsReport, refit_stride: usize) -> Result<()> {
    writeln!(
        w,
        "# level={} skipped={} refit_stride={}",
        report.level, report.skipped, refit_stride
    )?;
    if refit_stride != 1 {
        writeln!(w, "# origins subsampled: models refit every {refit_stride} periods")?;
    }
    Ok(())
}

/// One row per (variable, horizon).
pub fn write_metrics_wide<W: Write>(w: &mut W, report: &MetricsReport, refit_stride: usize) -> Result<()> {
    report_note(w, report, refit_stride)?;
    writeln!(w, "variable,horizon,count,mae,mse,coverage,interval_size,crps,interval")?;
    for r in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.variable,
            r.horizon,
            r.count,
            r.mae,
            r.mse,
            r.coverage,
            r.interval_size,
            r.crps,
            r.interval.as_str()
        )?;
    }
    Ok(())
}

/// One row per (variable, horizon, metric).
pub fn write_metrics_long<W: Write>(w: &mut W, report: &MetricsReport, refit_stride: usize) -> Result<()> {
    report_note(w, report, refit_stride)?;
    writeln!(w, "variable,horizon,metric,value")?;
    for r in &report.rows {
        for (name, v) in [
            ("mae", r.mae),
            ("mse", r.mse),
            ("coverage", r.coverage),
            ("interval_size", r.interval_size),
            ("crps", r.crps),
        ] {
            writeln!(w, "{},{},{name},{v}", r.variable, r.horizon)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginBandRow {
    pub variable: String,
    pub x: f64,
    pub alpha: f64,
    pub value: f64,
}

/// Pointwise posterior quantiles of the margin adjustment at each
/// distinct observed value of each variable.
pub fn margin_bands(draws: &PosteriorDraws) -> Vec<MarginBandRow> {
    let mut rows = Vec::new();
    let Some(first) = draws.draws.first() else {
        return rows;
    };
    if first.margins.is_empty() {
        return rows;
    }
    for i in 0..draws.n() {
        for &x in first.margins[i].locations() {
            let mut vals: Vec<f64> = draws.draws.iter().map(|d| d.margins[i].eval(x)).collect();
            vals.sort_by(f64::total_cmp);
            for alpha in BAND_LEVELS {
                rows.push(MarginBandRow {
                    variable: draws.names[i].clone(),
                    x,
                    alpha,
                    value: quantile_sorted(&vals, alpha),
                });
            }
        }
    }
    rows
}

pub fn write_margin_bands<W: Write>(w: &mut W, rows: &[MarginBandRow]) -> Result<()> {
    writeln!(w, "variable,x,alpha,value")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.variable, r.x, r.alpha, r.value)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapEntry {
    pub lag: usize,
    pub row: usize,
    pub col: usize,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    pub excludes_zero: bool,
}

/// Posterior means of corr(z_t) and corr(z_t, z_{t−1}) with HPD intervals
/// at level 1 − (1 − level)/m, m being the number of entries tested (the
/// off-diagonal lag-0 entries and every lag-1 entry).
pub fn correlation_heatmap(draws: &PosteriorDraws, level: f64) -> Result<Vec<HeatmapEntry>> {
    let n = draws.n();
    if draws.is_empty() {
        return Ok(Vec::new());
    }
    let mut c0 = vec![Vec::with_capacity(draws.len()); n * n];
    let mut c1 = vec![Vec::with_capacity(draws.len()); n * n];
    for d in &draws.draws {
        let f = implied_functionals(&d.params)?;
        for r in 0..n {
            for c in 0..n {
                c0[r * n + c].push(f.c0[(r, c)]);
                c1[r * n + c].push(f.c1[(r, c)]);
            }
        }
    }
    let tested = n * (n - 1) / 2 + n * n;
    let adjusted = 1.0 - (1.0 - level) / tested as f64;
    let mut out = Vec::with_capacity(2 * n * n);
    for (lag, cells) in [(0, &c0), (1, &c1)] {
        for r in 0..n {
            for c in 0..n {
                let v = &cells[r * n + c];
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                let (lower, upper) = hpd_interval(v, adjusted)?;
                out.push(HeatmapEntry {
                    lag,
                    row: r + 1,
                    col: c + 1,
                    mean,
                    lower,
                    upper,
                    excludes_zero: lower > 0.0 || upper < 0.0,
                });
            }
        }
    }
    Ok(out)
}

pub fn write_heatmap<W: Write>(w: &mut W, entries: &[HeatmapEntry]) -> Result<()> {
    writeln!(w, "lag,row,col,mean,hpd_lower,hpd_upper,excludes_zero")?;
    for e in entries {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            e.lag, e.row, e.col, e.mean, e.lower, e.upper, e.excludes_zero as u8
        )?;
    }
    Ok(())
}

fn write_file(path: PathBuf, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<PathBuf> {
    let mut w = BufWriter::new(File::create(&path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(path)
}

/// Writes whichever tables the inputs allow into `dir`; missing or empty
/// inputs give header-only files. Returns the paths written.
pub fn emit_reports(
    dir: &Path,
    report: Option<(&MetricsReport, usize)>,
    forecasts: &[OriginForecast],
    draws: Option<&PosteriorDraws>,
    level: f64,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let empty = MetricsReport {
        level,
        rows: Vec::new(),
        skipped: 0,
    };
    let (report, stride) = report.unwrap_or((&empty, 1));
    let bands = draws.map(margin_bands).unwrap_or_default();
    let heat = match draws {
        Some(d) => correlation_heatmap(d, level)?,
        None => Vec::new(),
    };
    Ok(vec![
        write_file(dir.join("metrics.csv"), |w| write_metrics_wide(w, report, stride))?,
        write_file(dir.join("metrics_long.csv"), |w| write_metrics_long(w, report, stride))?,
        write_file(dir.join("forecasts.csv"), |w| write_forecasts_long(w, forecasts))?,
        write_file(dir.join("margin_bands.csv"), |w| write_margin_bands(w, &bands))?,
        write_file(dir.join("heatmap.csv"), |w| write_heatmap(w, &heat))?,
    ])
}
