//! Expanding-window backtest.
//!
//! Origin t (1-based, t0 ≤ t ≤ T) fits on y_{1:t−1} and its horizon h
//! forecast targets y_{t+h−1}. Targets past T are skipped and counted.

use log::info;

use super::io::OriginForecast;
use super::par_map;
use crate::error::{DgfcError, Result};
use crate::forecast::{posterior_predictive, ForecastConfig};
use crate::gibbs::{run_chain, McmcConfig};
use crate::linalg::Matrix;
use crate::random::RngStream;
use crate::scoring::{MetricsAccumulator, MetricsReport};
use crate::stationary::{PriorHyper, TimeSeriesPanel};

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestConfig {
    pub t0: usize,
    pub horizons: usize,
    pub refit_stride: usize,
    pub level: f64,
    pub prior: PriorHyper,
    pub mcmc: McmcConfig,
    pub seed: u64,
    /// Worker threads for the origins; 0 uses every available core.
    pub threads: usize,
}

impl BacktestConfig {
    pub fn new(t0: usize, horizons: usize, prior: PriorHyper, mcmc: McmcConfig, seed: u64) -> Self {
        Self {
            t0,
            horizons,
            refit_stride: 1,
            level: 0.95,
            prior,
            mcmc,
            seed,
            threads: 1,
        }
    }

    pub fn validate(&self, t_len: usize) -> Result<()> {
        if self.horizons == 0 {
            return Err(DgfcError::Validation("backtest needs at least one horizon".into()));
        }
        if self.t0 <= self.horizons {
            return Err(DgfcError::Validation(format!(
                "first origin t0 = {} must exceed the horizon count {}",
                self.t0, self.horizons
            )));
        }
        if self.t0 > t_len {
            return Err(DgfcError::Validation(format!(
                "first origin t0 = {} is past the end of the data (T = {t_len})",
                self.t0
            )));
        }
        if self.t0 < 3 {
            return Err(DgfcError::Validation("training windows need at least two rows".into()));
        }
        if self.refit_stride == 0 {
            return Err(DgfcError::Validation("refit stride must be at least 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(DgfcError::Validation("interval level must lie in (0, 1)".into()));
        }
        self.mcmc.validate()?;
        self.prior.validate()
    }

    /// Origins t0, t0 + s, … up to T.
    pub fn origins(&self, t_len: usize) -> Vec<usize> {
        (self.t0..=t_len).step_by(self.refit_stride).collect()
    }
}

/// (MCMC seed, forecast seed) for one origin, derived from the base seed.
pub fn origin_seeds(base: u64, origin: usize) -> (u64, u64) {
    let s = RngStream::new(base, 0).substream(origin as u64);
    (s.substream(0).derived_seed(), s.substream(1).derived_seed())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestResult {
    pub report: MetricsReport,
    pub forecasts: Vec<OriginForecast>,
    pub origins: Vec<usize>,
    pub refit_stride: usize,
}

/// Actual values aligned with the forecast of one origin, NaN where the
/// target lies beyond the data.
pub fn aligned_actuals(panel: &TimeSeriesPanel, origin: usize, horizons: usize) -> Matrix {
    let y = panel.values();
    Matrix::from_fn(horizons, panel.n_series(), |h, i| {
        let target = origin + h;
        if target <= panel.len() {
            y[(target - 1, i)]
        } else {
            f64::NAN
        }
    })
}

fn run_origin(panel: &TimeSeriesPanel, cfg: &BacktestConfig, origin: usize) -> Result<OriginForecast> {
    let train_end = origin - 1;
    let training = panel.prefix(train_end)?;
    if training.len() >= origin {
        return Err(DgfcError::Contract(format!(
            "training window ends at {} but the first target is {origin}",
            training.len()
        )));
    }
    let (mcmc_seed, forecast_seed) = origin_seeds(cfg.seed, origin);
    let mcmc = McmcConfig {
        seed: mcmc_seed,
        store_latent: false,
        ..cfg.mcmc.clone()
    };
    let draws = run_chain(&training, &cfg.prior, &mcmc)?;
    let forecast = posterior_predictive(&draws, &ForecastConfig::new(cfg.horizons, forecast_seed))?;
    info!("backtest origin {origin} done");
    Ok(OriginForecast { origin, forecast })
}

/// Refits at every origin, forecasts horizons 1..H and scores them.
pub fn backtest(panel: &TimeSeriesPanel, cfg: &BacktestConfig) -> Result<BacktestResult> {
    cfg.validate(panel.len())?;
    let origins = cfg.origins(panel.len());
    let results = par_map(&origins, cfg.threads, |&t| {
        run_origin(panel, cfg, t).map_err(|e| DgfcError::Origin {
            origin: t,
            source: Box::new(e),
        })
    });
    let mut forecasts = Vec::with_capacity(origins.len());
    for r in results {
        forecasts.push(r?);
    }
    let mut acc = MetricsAccumulator::new(
        panel.names().to_vec(),
        panel.kinds().to_vec(),
        cfg.horizons,
        cfg.level,
    );
    for of in &forecasts {
        acc.add_forecast(&of.forecast, &aligned_actuals(panel, of.origin, cfg.horizons))?;
    }
    Ok(BacktestResult {
        report: acc.finish(),
        forecasts,
        origins,
        refit_stride: cfg.refit_stride,
    })
}
