//! Delimited text input and output.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{DgfcError, Result};
use crate::forecast::ForecastDraws;
use crate::linalg::Matrix;
use crate::stationary::{DataKind, TimeSeriesPanel};

/// Expected shape of an input file. `None` fields accept whatever the file
/// declares.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvSchema {
    pub names: Option<Vec<String>>,
    pub kinds: Option<Vec<DataKind>>,
}

/// Reads a panel: a header row of names, an optional row of kinds
/// (continuous | count), then one numeric row per time point.
pub fn ingest_csv(path: &Path, schema: &CsvSchema) -> Result<TimeSeriesPanel> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    parse_csv(&bytes, schema)
}

pub fn parse_csv(bytes: &[u8], schema: &CsvSchema) -> Result<TimeSeriesPanel> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut records = reader.records();
    let header = records
        .next()
        .ok_or_else(|| DgfcError::Validation("input file is empty".into()))?
        .map_err(|e| DgfcError::Parse {
            row: 1,
            col: 0,
            message: e.to_string(),
        })?;
    let names: Vec<String> = header.iter().map(|s| s.trim().to_string()).collect();
    let n = names.len();
    if let Some(expect) = &schema.names {
        if expect != &names {
            return Err(DgfcError::Validation(format!(
                "column names {names:?} do not match the schema {expect:?}"
            )));
        }
    }
    let mut kinds = vec![DataKind::Continuous; n];
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, rec) in records.enumerate() {
        let row = idx + 2;
        let rec = rec.map_err(|e| DgfcError::Parse {
            row,
            col: 0,
            message: e.to_string(),
        })?;
        if rec.len() != n {
            return Err(DgfcError::Parse {
                row,
                col: rec.len().min(n) + 1,
                message: format!("expected {n} fields, found {}", rec.len()),
            });
        }
        if idx == 0 && rec.iter().all(|f| DataKind::parse(f).is_some()) {
            kinds = rec.iter().map(|f| DataKind::parse(f).unwrap()).collect();
            continue;
        }
        let mut vals = Vec::with_capacity(n);
        for (j, field) in rec.iter().enumerate() {
            let f = field.trim();
            if f.is_empty() {
                return Err(DgfcError::Validation(format!(
                    "missing value at row {row}, column {}",
                    j + 1
                )));
            }
            let v: f64 = f.parse().map_err(|_| DgfcError::Parse {
                row,
                col: j + 1,
                message: format!("not a number: `{f}`"),
            })?;
            vals.push(v);
        }
        rows.push(vals);
    }
    if let Some(expect) = &schema.kinds {
        if expect != &kinds {
            return Err(DgfcError::Validation("data kinds do not match the schema".into()));
        }
    }
    let t_len = rows.len();
    let values = Matrix::from_fn(t_len, n, |r, c| rows[r][c]);
    TimeSeriesPanel::new(values, names, kinds)
}

/// Writes a panel in the format read by [`ingest_csv`], kind row included.
pub fn export_csv(path: &Path, panel: &TimeSeriesPanel) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_panel(&mut w, panel)?;
    w.flush()?;
    Ok(())
}

pub fn write_panel<W: Write>(w: W, panel: &TimeSeriesPanel) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| DgfcError::Io(std::io::Error::other(e.to_string()));
    out.write_record(panel.names()).map_err(csv_err)?;
    out.write_record(panel.kinds().iter().map(|k| k.as_str()))
        .map_err(csv_err)?;
    let v = panel.values();
    for r in 0..v.nrows() {
        out.write_record((0..v.ncols()).map(|c| format!("{}", v[(r, c)])))
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// One forecast origin of a backtest or a single forecast run.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginForecast {
    /// 1-based time index of the first forecast target.
    pub origin: usize,
    pub forecast: ForecastDraws,
}

/// Long table `draw,origin,horizon,variable,value` with 1-based horizons.
pub fn write_forecasts_long<W: Write>(w: &mut W, forecasts: &[OriginForecast]) -> Result<()> {
    writeln!(w, "draw,origin,horizon,variable,value")?;
    for of in forecasts {
        let f = &of.forecast;
        for m in 0..f.n_draws() {
            for h in 0..f.horizons() {
                for i in 0..f.n() {
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        f.draw_indices[m],
                        of.origin,
                        h + 1,
                        f.names[i],
                        f.get(m, h, i)
                    )?;
                }
            }
        }
    }
    Ok(())
}

pub fn save_forecasts_long(path: &Path, forecasts: &[OriginForecast]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_forecasts_long(&mut w, forecasts)?;
    w.flush()?;
    Ok(())
}

/// Reads a long forecast table back. Variable order and kinds come from
/// the caller since the table only carries names.
pub fn read_forecasts_long(path: &Path, names: &[String], kinds: &[DataKind]) -> Result<Vec<OriginForecast>> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_forecasts_long(&text, names, kinds)
}

pub fn parse_forecasts_long(text: &str, names: &[String], kinds: &[DataKind]) -> Result<Vec<OriginForecast>> {
    let n = names.len();
    // origin -> (draw ids in order, horizon count, values keyed (m, h, i))
    let mut origins: Vec<(usize, Vec<usize>, usize, Vec<(usize, usize, usize, f64)>)> = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        let row = idx + 1;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.splitn(5, ',').collect();
        if f.len() != 5 {
            return Err(DgfcError::Parse {
                row,
                col: f.len(),
                message: "expected 5 fields".into(),
            });
        }
        let num = |s: &str, col: usize| -> Result<usize> {
            s.parse().map_err(|_| DgfcError::Parse {
                row,
                col,
                message: format!("bad integer `{s}`"),
            })
        };
        let (draw, origin, horizon) = (num(f[0], 1)?, num(f[1], 2)?, num(f[2], 3)?);
        let var = names.iter().position(|v| v == f[3]).ok_or_else(|| DgfcError::Parse {
            row,
            col: 4,
            message: format!("unknown variable `{}`", f[3]),
        })?;
        let value: f64 = f[4].parse().map_err(|_| DgfcError::Parse {
            row,
            col: 5,
            message: format!("bad value `{}`", f[4]),
        })?;
        if horizon == 0 {
            return Err(DgfcError::Parse {
                row,
                col: 3,
                message: "horizons are 1-based".into(),
            });
        }
        if origins.last().map(|o| o.0) != Some(origin) {
            origins.push((origin, Vec::new(), 0, Vec::new()));
        }
        let entry = origins.last_mut().unwrap();
        if entry.1.last() != Some(&draw) {
            entry.1.push(draw);
        }
        let m = entry.1.len() - 1;
        entry.2 = entry.2.max(horizon);
        entry.3.push((m, horizon - 1, var, value));
    }
    let mut out = Vec::with_capacity(origins.len());
    for (origin, draw_ids, horizons, cells) in origins {
        let m = draw_ids.len();
        let mut values = vec![f64::NAN; m * horizons * n];
        for (mm, h, i, v) in cells {
            values[(mm * horizons + h) * n + i] = v;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(DgfcError::Validation(format!("forecast table is incomplete at origin {origin}")));
        }
        let mut forecast = ForecastDraws::from_values(values, m, horizons, n, names.to_vec(), kinds.to_vec())?;
        forecast.draw_indices = draw_ids;
        out.push(OriginForecast { origin, forecast });
    }
    Ok(out)
}
