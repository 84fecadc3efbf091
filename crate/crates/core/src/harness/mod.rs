//! Data ingestion, configuration, backtests, experiment drivers and report
//! output.

pub mod backtest;
pub mod config;
pub mod experiments;
pub mod io;
pub mod manifest;
pub mod reports;

pub use backtest::{backtest, origin_seeds, BacktestConfig, BacktestResult};
pub use config::{BacktestSection, DataConfig, ForecastSection, PriorConfig, RunConfig};
pub use experiments::{
    experiment_margin_recovery, experiment_param_concentration, margin_distances, margin_grid, MarginRecoveryFailure,
    MarginRecoveryRow, MarginRecoveryTable, ParamConcentrationRow, ParamConcentrationTable,
};
pub use io::{
    export_csv, ingest_csv, parse_csv, parse_forecasts_long, read_forecasts_long, save_forecasts_long, write_forecasts_long,
    write_panel, CsvSchema, OriginForecast,
};
pub use manifest::{digest, RunManifest};
pub use reports::{
    correlation_heatmap, emit_reports, margin_bands, write_heatmap, write_margin_bands, write_metrics_long,
    write_metrics_wide, HeatmapEntry, MarginBandRow, BAND_LEVELS,
};

/// Maps `f` over `items` on up to `threads` scoped workers (0 = one per
/// available core) and returns the results in input order.
pub fn par_map<T, U, F>(items: &[T], threads: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    let workers = if threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        threads
    }
    .min(items.len())
    .max(1);
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| {
                let f = &f;
                s.spawn(move || part.iter().map(f).collect::<Vec<U>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    #[test]
    fn par_map_keeps_order() {
        let xs: Vec<u64> = (0..37).collect();
        let serial = super::par_map(&xs, 1, |x| x * x);
        let parallel = super::par_map(&xs, 4, |x| x * x);
        assert_eq!(serial, parallel);
        assert_eq!(parallel[36], 1296);
    }
}
