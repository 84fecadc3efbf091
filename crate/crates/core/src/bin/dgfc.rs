use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};

use dgfc::dgp::{random_var_copula_spec, simulate_dgfc, to_panel, Dgp, DgpKind, DEFAULT_BURN};
use dgfc::forecast::{posterior_predictive, ForecastConfig};
use dgfc::gibbs::{read_draws, run_chain, write_draws, McmcConfig, ModelKind};
use dgfc::harness::backtest::aligned_actuals;
use dgfc::harness::{
    backtest, emit_reports, experiment_margin_recovery, experiment_param_concentration, ingest_csv,
    read_forecasts_long, save_forecasts_long, write_panel, BacktestConfig, CsvSchema, OriginForecast, RunConfig,
    RunManifest,
};
use dgfc::random::RngStream;
use dgfc::scoring::evaluate_forecasts;
use dgfc::stationary::TimeSeriesPanel;
use dgfc::{DgfcError, Result};

#[derive(Parser)]
#[command(name = "dgfc", version, about = "Dynamic Gaussian factor copula models for mixed-type time series")]
struct Cli {
    /// TOML run configuration; defaults apply to anything left out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimKind {
    Varma,
    Varch,
    VarmaCopula,
    VarCopula,
}

#[derive(Clone, Copy, ValueEnum)]
enum Study {
    MarginRecovery,
    ParamConcentration,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a panel from one of the built-in processes.
    Simulate {
        #[arg(long, value_enum)]
        dgp: SimKind,
        #[arg(long = "length")]
        t_len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the Gibbs sampler and store the posterior draws.
    Fit {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Posterior predictive paths from stored draws.
    Forecast {
        #[arg(long)]
        draws: PathBuf,
        #[arg(long)]
        horizons: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Expanding-window backtest with per-origin forecasts and metrics.
    Backtest {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Simulation studies on synthetic data.
    Experiment {
        #[arg(value_enum)]
        study: Study,
        #[arg(long, default_value = "varma")]
        dgp: String,
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<usize>>,
        #[arg(long, default_value_t = 10)]
        replicates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Plot-data tables from stored draws and/or forecasts.
    Report {
        #[arg(long)]
        draws: Option<PathBuf>,
        #[arg(long)]
        forecasts: Option<PathBuf>,
        /// Realized data used to score `--forecasts`.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn load_config(path: Option<&Path>) -> Result<(RunConfig, String)> {
    match path {
        Some(p) => {
            let cfg = RunConfig::load(p)?;
            let text = cfg.to_toml();
            Ok((cfg, text))
        }
        None => {
            let cfg = RunConfig::default();
            let text = cfg.to_toml();
            Ok((cfg, text))
        }
    }
}

fn data_path(arg: Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf> {
    arg.or_else(|| cfg.data.path.clone())
        .ok_or_else(|| DgfcError::Validation("no input data: pass --data or set [data] path".into()))
}

fn read_panel(path: &Path) -> Result<(TimeSeriesPanel, Vec<u8>)> {
    let bytes = fs::read(path)?;
    Ok((ingest_csv(path, &CsvSchema::default())?, bytes))
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

fn run(cli: Cli) -> Result<()> {
    let (cfg, cfg_text) = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate { dgp, t_len, seed, out } => {
            let mut rng = RngStream::new(seed, 0).rng();
            let panel = match dgp {
                SimKind::VarCopula => {
                    let spec = random_var_copula_spec(&mut rng)?;
                    to_panel(simulate_dgfc(&mut rng, &spec, t_len)?.0, &spec.margins)?
                }
                other => {
                    let kind = match other {
                        SimKind::Varma => DgpKind::Varma,
                        SimKind::Varch => DgpKind::Varch,
                        _ => DgpKind::VarmaCopula,
                    };
                    Dgp::random(&mut rng, kind)?.simulate(&mut rng, t_len, DEFAULT_BURN)?
                }
            };
            let mut bytes = Vec::new();
            write_panel(&mut bytes, &panel)?;
            fs::write(&out, &bytes)?;
            let args = format!("dgp = {}\nlength = {t_len}\n", dgp.to_possible_value().unwrap().get_name());
            RunManifest::new("simulate", seed, args.as_bytes(), &cfg_text).write(&manifest_path(&out))?;
        }
        Command::Fit { data, out } => {
            let path = data_path(data, &cfg)?;
            let (panel, bytes) = read_panel(&path)?;
            let prior = cfg.prior.to_hyper(panel.n_series(), cfg.mcmc.model)?;
            info!("fitting T = {}, n = {}, k = {}", panel.len(), panel.n_series(), prior.k);
            let draws = run_chain(&panel, &prior, &cfg.mcmc)?;
            write_draws(&out, &draws)?;
            RunManifest::new("fit", cfg.mcmc.seed, &bytes, &cfg_text).write(&manifest_path(&out))?;
        }
        Command::Forecast { draws, horizons, out } => {
            let bytes = fs::read(&draws)?;
            let posterior = read_draws(&draws)?;
            let h = horizons.unwrap_or(cfg.forecast.horizons);
            let forecast = posterior_predictive(&posterior, &ForecastConfig::new(h, cfg.forecast.seed))?;
            if forecast.terminal_fraction() > 0.05 {
                warn!(
                    "{:.1}% of predictive values sit at the largest training value",
                    100.0 * forecast.terminal_fraction()
                );
            }
            save_forecasts_long(
                &out,
                &[OriginForecast {
                    origin: posterior.t_len + 1,
                    forecast,
                }],
            )?;
            let cfg_text = format!("{cfg_text}# horizons = {h}\n");
            RunManifest::new("forecast", cfg.forecast.seed, &bytes, &cfg_text).write(&manifest_path(&out))?;
        }
        Command::Backtest { data, out_dir, threads } => {
            let path = data_path(data, &cfg)?;
            let (panel, bytes) = read_panel(&path)?;
            let b = &cfg.backtest;
            let mut bt = BacktestConfig::new(
                b.t0,
                b.horizons,
                cfg.prior.to_hyper(panel.n_series(), cfg.mcmc.model)?,
                cfg.mcmc.clone(),
                b.seed,
            );
            bt.refit_stride = b.refit_stride;
            bt.level = b.level;
            bt.threads = threads;
            let result = backtest(&panel, &bt)?;
            emit_reports(
                &out_dir,
                Some((&result.report, result.refit_stride)),
                &result.forecasts,
                None,
                b.level,
            )?;
            RunManifest::new("backtest", b.seed, &bytes, &cfg_text).write(&out_dir.join("manifest.txt"))?;
        }
        Command::Experiment {
            study,
            dgp,
            t_grid,
            replicates,
            seed,
            out,
            threads,
        } => {
            let mut text = String::new();
            let args;
            match study {
                Study::MarginRecovery => {
                    let kind = DgpKind::parse(&dgp)
                        .ok_or_else(|| DgfcError::Validation(format!("unknown process `{dgp}`")))?;
                    let grid = t_grid.unwrap_or_else(|| vec![25, 50, 100, 200]);
                    let mcmc = if cli.config.is_some() { cfg.mcmc.clone() } else { McmcConfig::default() };
                    let table = experiment_margin_recovery(seed, kind, &grid, replicates, &mcmc, threads)?;
                    text.push_str("dgp,length,replicate,variable,sup,grid_median\n");
                    for r in &table.rows {
                        text.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            kind.as_str(),
                            r.t_len,
                            r.replicate,
                            r.variable + 1,
                            r.sup,
                            r.grid_median
                        ));
                    }
                    for f in &table.failures {
                        warn!("replicate {} at T = {} failed: {}", f.replicate, f.t_len, f.message);
                        for i in 0..table.n {
                            text.push_str(&format!("{},{},{},{},NaN,NaN\n", kind.as_str(), f.t_len, f.replicate, i + 1));
                        }
                    }
                    args = format!("study = margin_recovery\ndgp = {dgp}\ngrid = {grid:?}\nreplicates = {replicates}\n");
                }
                Study::ParamConcentration => {
                    let grid = t_grid.unwrap_or_else(|| vec![50, 100, 200, 400, 800]);
                    let mcmc = if cli.config.is_some() {
                        cfg.mcmc.clone()
                    } else {
                        McmcConfig {
                            model: ModelKind::VarCopula,
                            ..McmcConfig::with_iterations(35_000, 5_000, 6)
                        }
                    };
                    let table = experiment_param_concentration(seed, &grid, &mcmc, threads)?;
                    text.push_str("length,entry,truth,median,q25,q75\n");
                    for r in &table.rows {
                        text.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            r.t_len, r.entry, r.truth, r.median, r.q25, r.q75
                        ));
                    }
                    args = format!("study = param_concentration\ngrid = {grid:?}\n");
                }
            }
            fs::write(&out, text)?;
            RunManifest::new("experiment", seed, args.as_bytes(), &cfg_text).write(&manifest_path(&out))?;
        }
        Command::Report {
            draws,
            forecasts,
            data,
            level,
            out_dir,
        } => {
            let mut bytes = Vec::new();
            let posterior = match &draws {
                Some(p) => {
                    bytes.extend(fs::read(p)?);
                    Some(read_draws(p)?)
                }
                None => None,
            };
            let (scored, report) = match (&forecasts, &data) {
                (Some(f), Some(d)) => {
                    let (panel, data_bytes) = read_panel(d)?;
                    bytes.extend(data_bytes);
                    bytes.extend(fs::read(f)?);
                    let fc = read_forecasts_long(f, panel.names(), panel.kinds())?;
                    let actuals: Vec<_> = fc
                        .iter()
                        .map(|o| aligned_actuals(&panel, o.origin, o.forecast.horizons()))
                        .collect();
                    let draws_only: Vec<_> = fc.iter().map(|o| o.forecast.clone()).collect();
                    let report = if fc.is_empty() {
                        None
                    } else {
                        Some(evaluate_forecasts(&draws_only, &actuals, level)?)
                    };
                    (fc, report)
                }
                (Some(_), None) => {
                    return Err(DgfcError::Validation("--forecasts needs --data to score against".into()));
                }
                _ => (Vec::new(), None),
            };
            emit_reports(&out_dir, report.as_ref().map(|r| (r, 1)), &scored, posterior.as_ref(), level)?;
            let cfg_text = format!("{cfg_text}# level = {level}\n");
            RunManifest::new("report", 0, &bytes, &cfg_text).write(&out_dir.join("manifest.txt"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
