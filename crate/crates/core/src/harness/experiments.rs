//! Simulation studies: margin recovery across DGPs and concentration of
//! the identified VAR-copula parameters.

use super::par_map;
use crate::dgp::{random_var_copula_spec, simulate_dgfc, to_panel, Dgp, DgpKind, Margin, DEFAULT_BURN};
use crate::error::{DgfcError, Result};
use crate::gibbs::{run_chain, McmcConfig, ModelKind};
use crate::linalg::Matrix;
use crate::random::RngStream;
use crate::stationary::{identified_params, DataKind, PriorHyper, TimeSeriesPanel};

/// Evaluation points: true-margin quantiles at u = 0.01, …, 0.99, with
/// repeated points (count margins) removed.
pub fn margin_grid(margin: &Margin) -> Vec<f64> {
    let mut grid: Vec<f64> = (1..=99).map(|j| margin.quantile(j as f64 / 100.0)).collect();
    if margin.kind() == DataKind::Count {
        grid.dedup();
    }
    grid
}

/// (sup, median) of |estimate − truth| over a grid.
pub fn margin_distances(estimate: &[f64], truth: &[f64]) -> (f64, f64) {
    let mut d: Vec<f64> = estimate.iter().zip(truth).map(|(a, b)| (a - b).abs()).collect();
    d.sort_by(f64::total_cmp);
    let sup = d.last().copied().unwrap_or(0.0);
    (sup, quantile_sorted(&d, 0.5))
}

/// Linearly interpolated sample quantile of sorted data.
pub(crate) fn quantile_sorted(s: &[f64], p: f64) -> f64 {
    if s.is_empty() {
        return f64::NAN;
    }
    let pos = p * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    s[lo] + (pos - lo as f64) * (s[hi] - s[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginRecoveryRow {
    pub t_len: usize,
    pub replicate: usize,
    pub variable: usize,
    pub sup: f64,
    pub grid_median: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginRecoveryTable {
    pub dgp: DgpKind,
    pub t_grid: Vec<usize>,
    pub n: usize,
    pub rows: Vec<MarginRecoveryRow>,
    pub failures: Vec<MarginRecoveryFailure>,
}

/// A (replicate, T) cell whose chain stopped with a sampler error.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginRecoveryFailure {
    pub t_len: usize,
    pub replicate: usize,
    pub message: String,
}

impl MarginRecoveryTable {
    /// Medians over completed replicates of (sup, grid-median) for one T
    /// and variable.
    pub fn summary(&self, t_len: usize, variable: usize) -> (f64, f64) {
        let mut sup = Vec::new();
        let mut med = Vec::new();
        for r in self.rows.iter().filter(|r| r.t_len == t_len && r.variable == variable) {
            sup.push(r.sup);
            med.push(r.grid_median);
        }
        sup.sort_by(f64::total_cmp);
        med.sort_by(f64::total_cmp);
        (quantile_sorted(&sup, 0.5), quantile_sorted(&med, 0.5))
    }
}

fn check_grid(t_grid: &[usize]) -> Result<()> {
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DgfcError::Validation("T grid must be nonempty and increasing".into()));
    }
    if t_grid[0] < 2 {
        return Err(DgfcError::Validation("series lengths must be at least 2".into()));
    }
    Ok(())
}

/// For each replicate a DGP and one path of length max(T grid) are drawn;
/// each T fits the first T observations. Distances compare the
/// posterior-mean margin with the exact one. A cell whose chain fails with
/// a sampler error is listed in `failures` and left out of the summaries;
/// any other error aborts the study.
pub fn experiment_margin_recovery(
    seed: u64,
    dgp: DgpKind,
    t_grid: &[usize],
    replicates: usize,
    mcmc: &McmcConfig,
    threads: usize,
) -> Result<MarginRecoveryTable> {
    check_grid(t_grid)?;
    let base = RngStream::new(seed, 0);
    let specs: Vec<Dgp> = (0..replicates)
        .map(|r| Dgp::random(&mut base.substream(r as u64).rng(), dgp))
        .collect::<Result<_>>()?;
    let t_max = *t_grid.last().unwrap();
    let paths: Vec<TimeSeriesPanel> = specs
        .iter()
        .enumerate()
        .map(|(r, spec)| spec.simulate(&mut base.substream(r as u64).substream(0).rng(), t_max, DEFAULT_BURN))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> = (0..replicates)
        .flat_map(|r| t_grid.iter().map(move |&t| (r, t)))
        .collect();
    type Cell = std::result::Result<Vec<MarginRecoveryRow>, MarginRecoveryFailure>;
    let results = par_map(&cells, threads, |&(r, t)| -> Result<Cell> {
        let stream = base.substream(r as u64).substream(1 + t as u64);
        let spec = &specs[r];
        let panel = paths[r].prefix(t)?;
        let cfg = McmcConfig {
            seed: stream.derived_seed(),
            store_latent: false,
            ..mcmc.clone()
        };
        let prior = PriorHyper::default_for(panel.n_series());
        let draws = match run_chain(&panel, &prior, &cfg) {
            Ok(d) => d,
            Err(e @ DgfcError::Sampler { .. }) => {
                return Ok(Err(MarginRecoveryFailure {
                    t_len: t,
                    replicate: r,
                    message: e.to_string(),
                }))
            }
            Err(e) => return Err(e),
        };
        let margins = spec.margins()?;
        Ok(Ok(margins
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let grid = margin_grid(m);
                let truth: Vec<f64> = grid.iter().map(|&x| m.cdf(x)).collect();
                let (sup, grid_median) = margin_distances(&draws.mean_margin_on_grid(i, &grid), &truth);
                MarginRecoveryRow {
                    t_len: t,
                    replicate: r,
                    variable: i,
                    sup,
                    grid_median,
                }
            })
            .collect()))
    });
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r? {
            Ok(cell) => rows.extend(cell),
            Err(f) => failures.push(f),
        }
    }
    Ok(MarginRecoveryTable {
        dgp,
        t_grid: t_grid.to_vec(),
        n: specs.first().map_or(0, |s| s.margins().map_or(0, |m| m.len())),
        rows,
        failures,
    })
}

pub const PARAM_ENTRIES: [&str; 8] = ["g11", "g12", "g21", "g22", "s11", "s12", "s21", "s22"];

#[derive(Debug, Clone, PartialEq)]
pub struct ParamConcentrationRow {
    pub t_len: usize,
    pub entry: &'static str,
    pub truth: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

impl ParamConcentrationRow {
    pub fn iqr(&self) -> f64 {
        self.q75 - self.q25
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamConcentrationTable {
    pub t_grid: Vec<usize>,
    pub rows: Vec<ParamConcentrationRow>,
}

impl ParamConcentrationTable {
    pub fn row(&self, t_len: usize, entry: &str) -> Option<&ParamConcentrationRow> {
        self.rows.iter().find(|r| r.t_len == t_len && r.entry == entry)
    }
}

fn entries(g: &Matrix, s: &Matrix) -> [f64; 8] {
    [
        g[(0, 0)],
        g[(0, 1)],
        g[(1, 0)],
        g[(1, 1)],
        s[(0, 0)],
        s[(0, 1)],
        s[(1, 0)],
        s[(1, 1)],
    ]
}

/// One bivariate VAR-copula path of length max(T grid); each T fits the
/// VAR-copula model to the first T observations. Truth and draws both go
/// through the same identification map.
pub fn experiment_param_concentration(
    seed: u64,
    t_grid: &[usize],
    mcmc: &McmcConfig,
    threads: usize,
) -> Result<ParamConcentrationTable> {
    check_grid(t_grid)?;
    let base = RngStream::new(seed, 0);
    let spec = random_var_copula_spec(&mut base.substream(0).rng())?;
    let (gt, st) = spec.identified_truth()?;
    let truth = entries(&gt, &st);
    let t_max = *t_grid.last().unwrap();
    let (y, _) = simulate_dgfc(&mut base.substream(1).rng(), &spec, t_max)?;
    let full = to_panel(y, &spec.margins)?;
    let results = par_map(t_grid, threads, |&t| -> Result<Vec<ParamConcentrationRow>> {
        let panel = full.prefix(t)?;
        let cfg = McmcConfig {
            seed: base.substream(2).substream(t as u64).derived_seed(),
            model: ModelKind::VarCopula,
            store_latent: false,
            store_margins: false,
            ..mcmc.clone()
        };
        let draws = run_chain(&panel, &PriorHyper::with_k(2), &cfg)?;
        let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(draws.len()); 8];
        for d in &draws.draws {
            let (g, s) = identified_params(&d.params)?;
            for (c, v) in cols.iter_mut().zip(entries(&g, &s)) {
                c.push(v);
            }
        }
        Ok(cols
            .into_iter()
            .enumerate()
            .map(|(j, mut c)| {
                c.sort_by(f64::total_cmp);
                ParamConcentrationRow {
                    t_len: t,
                    entry: PARAM_ENTRIES[j],
                    truth: truth[j],
                    median: quantile_sorted(&c, 0.5),
                    q25: quantile_sorted(&c, 0.25),
                    q75: quantile_sorted(&c, 0.75),
                }
            })
            .collect())
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(ParamConcentrationTable {
        t_grid: t_grid.to_vec(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn true_margin_has_zero_distance() {
        for m in [Margin::skew_t_default(), Margin::Poisson { lambda: 5.0 }] {
            let grid = margin_grid(&m);
            let truth: Vec<f64> = grid.iter().map(|&x| m.cdf(x)).collect();
            assert_eq!(margin_distances(&truth, &truth), (0.0, 0.0));
        }
    }

    #[test]
    fn quantiles_interpolate() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.5), 2.5);
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0), 4.0);
    }
}
