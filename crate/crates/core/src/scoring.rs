//! Point, interval and density scores computed from predictive samples.

use serde::Serialize;

use crate::error::{DgfcError, Result};
use crate::forecast::ForecastDraws;
use crate::linalg::Matrix;
use crate::stationary::DataKind;

fn sorted(draws: &[f64]) -> Vec<f64> {
    let mut s = draws.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    s
}

/// E|X − y| − ½E|X − X′| over all M² ordered pairs.
pub fn crps_sample(draws: &[f64], obs: f64) -> Result<f64> {
    if draws.is_empty() {
        return Err(DgfcError::Contract("CRPS needs at least one draw".into()));
    }
    let m = draws.len() as f64;
    let first = draws.iter().map(|x| (x - obs).abs()).sum::<f64>() / m;
    let mut pair = 0.0;
    for a in draws {
        for b in draws {
            pair += (a - b).abs();
        }
    }
    Ok(first - 0.5 * pair / (m * m))
}

/// Same value as [`crps_sample`] via Σ_{i,j}|x_i − x_j| = 2 Σ_j (2j − M + 1) x_(j).
/// The weights sum to zero, so centring on x_(0) leaves the sum unchanged.
pub fn crps_sample_sorted(draws: &[f64], obs: f64) -> Result<f64> {
    if draws.is_empty() {
        return Err(DgfcError::Contract("CRPS needs at least one draw".into()));
    }
    let s = sorted(draws);
    let m = s.len() as f64;
    let first = s.iter().map(|x| (x - obs).abs()).sum::<f64>() / m;
    let pair: f64 = s
        .iter()
        .enumerate()
        .map(|(j, x)| (2.0 * j as f64 - m + 1.0) * (x - s[0]))
        .sum::<f64>()
        * 2.0;
    Ok((first - 0.5 * pair / (m * m)).max(0.0))
}

fn window(draws: &[f64], level: f64) -> Result<usize> {
    if draws.is_empty() {
        return Err(DgfcError::Contract("interval needs at least one draw".into()));
    }
    if !(level > 0.0 && level <= 1.0) {
        return Err(DgfcError::Contract(format!("interval level {level} outside (0, 1]")));
    }
    Ok(((level * draws.len() as f64).ceil() as usize).clamp(1, draws.len()))
}

/// Shortest window of ⌈level·M⌉ consecutive order statistics; the leftmost
/// one on ties.
pub fn hpd_interval(draws: &[f64], level: f64) -> Result<(f64, f64)> {
    let w = window(draws, level)?;
    let s = sorted(draws);
    let mut best = 0;
    for i in 1..=s.len() - w {
        if s[i + w - 1] - s[i] < s[best + w - 1] - s[best] {
            best = i;
        }
    }
    Ok((s[best], s[best + w - 1]))
}

/// Order statistics ⌈(α/2)M⌉ and ⌈(1 − α/2)M⌉ with α = 1 − level.
pub fn equal_tailed_interval(draws: &[f64], level: f64) -> Result<(f64, f64)> {
    window(draws, level)?;
    let s = sorted(draws);
    let m = s.len() as f64;
    let alpha = 1.0 - level;
    let lo = ((0.5 * alpha * m).ceil() as usize).clamp(1, s.len());
    let hi = (((1.0 - 0.5 * alpha) * m).ceil() as usize).clamp(1, s.len());
    Ok((s[lo - 1], s[hi - 1]))
}

/// Midpoint of the central pair for continuous data with even M, lower
/// central value for counts.
pub fn predictive_median(draws: &[f64], kind: DataKind) -> Result<f64> {
    if draws.is_empty() {
        return Err(DgfcError::Contract("median needs at least one draw".into()));
    }
    let s = sorted(draws);
    let m = s.len();
    if m % 2 == 1 {
        return Ok(s[m / 2]);
    }
    Ok(match kind {
        DataKind::Continuous => 0.5 * (s[m / 2 - 1] + s[m / 2]),
        DataKind::Count => s[m / 2 - 1],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointErrors {
    pub absolute: f64,
    pub squared: f64,
}

pub fn point_errors(draws: &[f64], obs: f64, kind: DataKind) -> Result<PointErrors> {
    let med = predictive_median(draws, kind)?;
    Ok(PointErrors {
        absolute: (med - obs).abs(),
        squared: (med - obs).powi(2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    Hpd,
    EqualTailed,
}

impl IntervalKind {
    pub fn for_kind(kind: DataKind) -> Self {
        match kind {
            DataKind::Continuous => IntervalKind::Hpd,
            DataKind::Count => IntervalKind::EqualTailed,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            IntervalKind::Hpd => "hpd",
            IntervalKind::EqualTailed => "equal_tailed",
        }
    }

    pub fn interval(&self, draws: &[f64], level: f64) -> Result<(f64, f64)> {
        match self {
            IntervalKind::Hpd => hpd_interval(draws, level),
            IntervalKind::EqualTailed => equal_tailed_interval(draws, level),
        }
    }
}

/// Scores of one (variable, horizon) cell averaged over its evaluation
/// points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub variable: String,
    pub horizon: usize,
    pub count: usize,
    pub mae: f64,
    pub mse: f64,
    pub coverage: f64,
    pub interval_size: f64,
    pub crps: f64,
    pub interval: IntervalKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub level: f64,
    pub rows: Vec<MetricsRow>,
    /// Forecast targets that fell beyond the available data.
    pub skipped: usize,
}

impl MetricsReport {
    pub fn row(&self, variable: &str, horizon: usize) -> Option<&MetricsRow> {
        self.rows
            .iter()
            .find(|r| r.variable == variable && r.horizon == horizon)
    }
}

#[derive(Debug, Clone, Default)]
struct Cell {
    count: usize,
    abs: f64,
    sq: f64,
    covered: usize,
    size: f64,
    crps: f64,
}

/// Running sums of the per-cell scores.
#[derive(Debug, Clone)]
pub struct MetricsAccumulator {
    names: Vec<String>,
    kinds: Vec<DataKind>,
    horizons: usize,
    level: f64,
    cells: Vec<Cell>,
    skipped: usize,
}

impl MetricsAccumulator {
    pub fn new(names: Vec<String>, kinds: Vec<DataKind>, horizons: usize, level: f64) -> Self {
        let n = names.len();
        Self {
            names,
            kinds,
            horizons,
            level,
            cells: vec![Cell::default(); n * horizons],
            skipped: 0,
        }
    }

    /// Scores one predictive sample against its realized value.
    pub fn add(&mut self, h: usize, i: usize, draws: &[f64], obs: f64) -> Result<()> {
        if h >= self.horizons || i >= self.names.len() {
            return Err(DgfcError::Contract("metrics cell out of range".into()));
        }
        let kind = self.kinds[i];
        let pe = point_errors(draws, obs, kind)?;
        let (lo, hi) = IntervalKind::for_kind(kind).interval(draws, self.level)?;
        let crps = crps_sample_sorted(draws, obs)?;
        let cell = &mut self.cells[h * self.names.len() + i];
        cell.count += 1;
        cell.abs += pe.absolute;
        cell.sq += pe.squared;
        cell.covered += (lo <= obs && obs <= hi) as usize;
        cell.size += hi - lo;
        cell.crps += crps;
        Ok(())
    }

    pub fn skip(&mut self, count: usize) {
        self.skipped += count;
    }

    /// Adds every (horizon, variable) cell of one forecast; NaN actuals
    /// mark targets beyond the data and are counted as skipped.
    pub fn add_forecast(&mut self, forecast: &ForecastDraws, actuals: &Matrix) -> Result<()> {
        if actuals.shape() != (forecast.horizons(), forecast.n()) || forecast.horizons() > self.horizons {
            return Err(DgfcError::Contract(format!(
                "actuals are {:?} but forecasts cover {} horizons × {} variables",
                actuals.shape(),
                forecast.horizons(),
                forecast.n()
            )));
        }
        for h in 0..forecast.horizons() {
            for i in 0..forecast.n() {
                let obs = actuals[(h, i)];
                if obs.is_nan() {
                    self.skipped += 1;
                } else {
                    self.add(h, i, &forecast.sample(h, i), obs)?;
                }
            }
        }
        Ok(())
    }

    pub fn finish(&self) -> MetricsReport {
        let n = self.names.len();
        let mut rows = Vec::with_capacity(n * self.horizons);
        for i in 0..n {
            for h in 0..self.horizons {
                let c = &self.cells[h * n + i];
                let d = c.count.max(1) as f64;
                let nan_if_empty = |v: f64| if c.count == 0 { f64::NAN } else { v / d };
                rows.push(MetricsRow {
                    variable: self.names[i].clone(),
                    horizon: h + 1,
                    count: c.count,
                    mae: nan_if_empty(c.abs),
                    mse: nan_if_empty(c.sq),
                    coverage: nan_if_empty(c.covered as f64),
                    interval_size: nan_if_empty(c.size),
                    crps: nan_if_empty(c.crps),
                    interval: IntervalKind::for_kind(self.kinds[i]),
                });
            }
        }
        MetricsReport {
            level: self.level,
            rows,
            skipped: self.skipped,
        }
    }
}

/// Scores forecasts against realized values (H×n each, NaN where the
/// target is unavailable) and aggregates per variable and horizon.
pub fn evaluate_forecasts(forecasts: &[ForecastDraws], actuals: &[Matrix], level: f64) -> Result<MetricsReport> {
    if forecasts.len() != actuals.len() {
        return Err(DgfcError::Contract("one actuals matrix per forecast is required".into()));
    }
    let Some(first) = forecasts.first() else {
        return Err(DgfcError::Contract("no forecasts to evaluate".into()));
    };
    let mut acc = MetricsAccumulator::new(first.names.clone(), first.kinds.clone(), first.horizons(), level);
    for (f, a) in forecasts.iter().zip(actuals) {
        acc.add_forecast(f, a)?;
    }
    Ok(acc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crps_two_point() {
        assert_eq!(crps_sample(&[0.0, 2.0], 1.0).unwrap(), 0.5);
        assert_eq!(crps_sample_sorted(&[2.0, 0.0], 1.0).unwrap(), 0.5);
        assert_eq!(crps_sample(&[3.0; 4], 3.0).unwrap(), 0.0);
    }

    #[test]
    fn medians() {
        assert_eq!(predictive_median(&[0.0, 10.0], DataKind::Continuous).unwrap(), 5.0);
        assert_eq!(predictive_median(&[0.0, 10.0], DataKind::Count).unwrap(), 0.0);
        let pe = point_errors(&[0.0, 10.0], 4.0, DataKind::Continuous).unwrap();
        assert_eq!(pe.squared, 1.0);
        assert_eq!(point_errors(&[1.0, 2.0, 3.0], 2.0, DataKind::Count).unwrap().absolute, 0.0);
    }

    #[test]
    fn constant_intervals() {
        assert_eq!(hpd_interval(&[2.5; 7], 0.95).unwrap(), (2.5, 2.5));
        assert_eq!(equal_tailed_interval(&[2.5; 7], 0.95).unwrap(), (2.5, 2.5));
        assert!(hpd_interval(&[], 0.95).is_err());
    }

    #[test]
    fn equal_tailed_order_statistics() {
        let draws: Vec<f64> = (1..=100).map(f64::from).collect();
        // ⌈0.025·100⌉ = 3, ⌈0.975·100⌉ = 98
        assert_eq!(equal_tailed_interval(&draws, 0.95).unwrap(), (3.0, 98.0));
    }
}
