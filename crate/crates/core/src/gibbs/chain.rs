use log::debug;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::blocks::{
    accept_var_proposal, draw_factors, draw_global_scales, draw_latent_cell, draw_loadings,
    draw_local_scales, draw_var_block, draw_var_copula_cell, draw_variances,
    VarNeighbourPrecisions,
};
use super::rank::RankStructure;
use crate::error::{DgfcError, Result};
use crate::linalg::{sample_covariance, Matrix, Vector};
use crate::margins::{margin_adjustment, StepCdf};
use crate::random::{norm_quantile, RngStream};
use crate::stationary::{implied_functionals, DataKind, DgfcParams, PriorHyper, TimeSeriesPanel};

/// Which latent model the sampler targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Dynamic factor copula: x_t = Λη_t + e_t.
    Factor,
    /// VAR(1) copula: x_t = η_t (Λ = I, V = 0).
    VarCopula,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Factor => "factor",
            ModelKind::VarCopula => "var_copula",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "factor" => Some(ModelKind::Factor),
            "var_copula" => Some(ModelKind::VarCopula),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcConfig {
    pub total: usize,
    pub burn: usize,
    pub thin: usize,
    pub chains: usize,
    pub seed: u64,
    /// Redraws of the VAR block allowed per sweep before giving up.
    pub stability_cap: usize,
    /// Metropolis correction for the η₁ ~ N(0, Γ0) term in the VAR block.
    pub exact_initial_state: bool,
    /// Visit latent cells in a random order each sweep.
    pub random_scan: bool,
    /// Keep the full latent paths of stored draws; otherwise only the
    /// final time point.
    pub store_latent: bool,
    /// Attach the margin adjustment to each stored draw.
    pub store_margins: bool,
    pub model: ModelKind,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            total: 10_000,
            burn: 5_000,
            thin: 5,
            chains: 1,
            seed: 0,
            stability_cap: 1000,
            exact_initial_state: true,
            random_scan: false,
            store_latent: true,
            store_margins: true,
            model: ModelKind::Factor,
        }
    }
}

impl McmcConfig {
    pub fn with_iterations(total: usize, burn: usize, thin: usize) -> Self {
        Self {
            total,
            burn,
            thin,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn >= self.total {
            return Err(DgfcError::Validation(format!(
                "burn-in {} must be smaller than total iterations {}",
                self.burn, self.total
            )));
        }
        if self.thin == 0 || self.chains == 0 {
            return Err(DgfcError::Validation("thinning stride and chain count must be at least 1".into()));
        }
        Ok(())
    }

    /// Draws stored per chain.
    pub fn kept_per_chain(&self) -> usize {
        (self.total - self.burn) / self.thin
    }
}

/// Unscaled latent panel x (T×n) and factors η (T×k). z = x/√D0 is
/// derived on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentState {
    pub x: Matrix,
    pub eta: Matrix,
}

impl LatentState {
    pub fn z(&self, d0: &Vector) -> Matrix {
        let mut z = self.x.clone();
        for (i, mut col) in z.column_iter_mut().enumerate() {
            col /= d0[i].sqrt();
        }
        z
    }

    pub fn final_factor(&self) -> Vector {
        self.eta.row(self.eta.nrows() - 1).transpose()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraw {
    pub params: DgfcParams,
    pub latent: LatentState,
    pub d0: Vector,
    pub margins: Vec<StepCdf>,
    pub chain: usize,
    pub iteration: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChainDiagnostics {
    pub var_proposals: usize,
    pub var_accepted: usize,
}

impl ChainDiagnostics {
    pub fn acceptance_rate(&self) -> f64 {
        if self.var_proposals == 0 {
            1.0
        } else {
            self.var_accepted as f64 / self.var_proposals as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub draws: Vec<PosteriorDraw>,
    pub names: Vec<String>,
    pub kinds: Vec<DataKind>,
    pub model: ModelKind,
    pub seed: u64,
    pub t_len: usize,
    pub diagnostics: ChainDiagnostics,
}

impl PosteriorDraws {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    /// Posterior mean of the margin-adjusted CDF of variable i on a grid.
    pub fn mean_margin_on_grid(&self, i: usize, grid: &[f64]) -> Vec<f64> {
        let cdfs: Vec<StepCdf> = self.draws.iter().map(|d| d.margins[i].clone()).collect();
        crate::margins::mean_cdf_on_grid(&cdfs, grid)
    }
}

/// Average ranks (ties share the mean of their positions), 1-based.
pub fn mid_ranks(col: &[f64]) -> Vec<f64> {
    let t_len = col.len();
    let mut order: Vec<usize> = (0..t_len).collect();
    order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
    let mut out = vec![0.0; t_len];
    let mut start = 0;
    while start < t_len {
        let mut end = start + 1;
        while end < t_len && col[order[end]] == col[order[start]] {
            end += 1;
        }
        let mid = 0.5 * ((start + 1) + end) as f64;
        for &t in &order[start..end] {
            out[t] = mid;
        }
        start = end;
    }
    out
}

/// Normal scores Φ⁻¹(r/(T+1)) of the mid-ranks, column by column.
pub fn normal_scores(y: &Matrix) -> Matrix {
    let (t_len, n) = y.shape();
    let mut x = Matrix::zeros(t_len, n);
    for i in 0..n {
        let col: Vec<f64> = y.column(i).iter().copied().collect();
        for (t, r) in mid_ranks(&col).into_iter().enumerate() {
            x[(t, i)] = norm_quantile(r / (t_len as f64 + 1.0));
        }
    }
    x
}

/// Starting point: normal scores for x, principal components for (η, Λ),
/// residual variances for v, G = 0, Σ = I, shrinkage scales at prior means.
pub fn initial_state(y: &Matrix, prior: &PriorHyper, model: ModelKind) -> Result<(LatentState, DgfcParams)> {
    let (t_len, n) = y.shape();
    let k = prior.k;
    let x = normal_scores(y);
    if model == ModelKind::VarCopula {
        if k != n {
            return Err(DgfcError::Validation(format!(
                "the VAR copula needs k = n, got k = {k}, n = {n}"
            )));
        }
        let params = DgfcParams::var_copula(Matrix::zeros(k, k), Matrix::identity(k, k));
        return Ok((
            LatentState {
                eta: x.clone(),
                x,
            },
            params,
        ));
    }
    let cov = sample_covariance(&x);
    let eig = nalgebra::SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut lambda = Matrix::zeros(n, k);
    for (l, &j) in order.iter().take(k.min(n)).enumerate() {
        let mut vec = eig.eigenvectors.column(j).into_owned();
        let pivot = vec.iamax();
        if vec[pivot] < 0.0 {
            vec = -vec;
        }
        lambda.set_column(l, &vec);
    }
    let eta = &x * &lambda;
    let resid = &x - &eta * lambda.transpose();
    let v = Vector::from_iterator(
        n,
        resid
            .column_iter()
            .map(|c| (c.norm_squared() / t_len as f64).max(0.05)),
    );
    let mut delta = Vector::from_element(k, prior.b0);
    delta[0] = prior.a0;
    let params = DgfcParams::new(
        Matrix::zeros(k, k),
        Matrix::identity(k, k),
        lambda,
        v,
        Matrix::from_element(n, k, 1.0),
        delta,
    );
    Ok((LatentState { x, eta }, params))
}

fn latent_order<R: Rng + ?Sized>(rng: &mut R, t_len: usize, n: usize, random_scan: bool) -> Vec<(usize, usize)> {
    let mut cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..t_len).map(move |t| (t, i))).collect();
    if random_scan {
        cells.shuffle(rng);
    }
    cells
}

/// One full scan: VAR block, factors, loadings, variances, local scales,
/// global scales, latent cells. Returns whether the VAR proposal was kept.
#[allow(clippy::too_many_arguments)]
pub fn gibbs_sweep<R: Rng + ?Sized>(
    rng: &mut R,
    state: &mut LatentState,
    params: &mut DgfcParams,
    rank: &RankStructure,
    prior: &PriorHyper,
    mcmc: &McmcConfig,
    iteration: usize,
) -> Result<bool> {
    let (t_len, n) = state.x.shape();
    let (g_new, sigma_new) = draw_var_block(rng, &state.eta, prior, mcmc.stability_cap, iteration)?;
    let accepted = if mcmc.exact_initial_state {
        let eta1 = state.eta.row(0).transpose();
        accept_var_proposal(rng, &eta1, (&params.g, &params.sigma), (&g_new, &sigma_new))?
    } else {
        true
    };
    if accepted {
        params.g = g_new;
        params.sigma = sigma_new;
    }
    match mcmc.model {
        ModelKind::Factor => {
            state.eta = draw_factors(rng, &state.x, params)?;
            params.lambda = draw_loadings(rng, &state.x, &state.eta, &params.v, &params.phi, &params.tau)?;
            params.v = draw_variances(rng, &state.x, &state.eta, &params.lambda, prior.alpha0, prior.beta0)?;
            params.phi = draw_local_scales(rng, &params.lambda, &params.tau, prior.nu0)?;
            let (delta, tau) = draw_global_scales(rng, &params.lambda, &params.phi, &params.delta, prior.a0, prior.b0)?;
            params.delta = delta;
            params.tau = tau;
            for (t, i) in latent_order(rng, t_len, n, mcmc.random_scan) {
                draw_latent_cell(rng, rank, &mut state.x, &state.eta, params, t, i)?;
            }
        }
        ModelKind::VarCopula => {
            let prec = VarNeighbourPrecisions::new(&params.g, &params.sigma)?;
            for (t, i) in latent_order(rng, t_len, n, mcmc.random_scan) {
                draw_var_copula_cell(rng, rank, &mut state.x, &prec, t, i)?;
            }
            state.eta.copy_from(&state.x);
        }
    }
    Ok(accepted)
}

fn attach_margins(y: &Matrix, z: &Matrix) -> Result<Vec<StepCdf>> {
    (0..y.ncols())
        .map(|i| {
            let yi: Vec<f64> = y.column(i).iter().copied().collect();
            let zi: Vec<f64> = z.column(i).iter().copied().collect();
            margin_adjustment(&yi, &zi)
        })
        .collect()
}

/// Runs one chain on the given RNG stream id.
pub fn run_single_chain(
    panel: &TimeSeriesPanel,
    prior: &PriorHyper,
    mcmc: &McmcConfig,
    chain: usize,
) -> Result<PosteriorDraws> {
    mcmc.validate()?;
    prior.validate()?;
    let y = panel.values();
    let rank = RankStructure::from_panel(panel);
    let (mut state, mut params) = initial_state(y, prior, mcmc.model)?;
    let mut rng = RngStream::new(mcmc.seed, chain as u64).rng();
    let mut draws = Vec::with_capacity(mcmc.kept_per_chain());
    let mut diagnostics = ChainDiagnostics::default();
    for it in 1..=mcmc.total {
        let accepted = gibbs_sweep(&mut rng, &mut state, &mut params, &rank, prior, mcmc, it)?;
        diagnostics.var_proposals += 1;
        diagnostics.var_accepted += accepted as usize;
        if it > mcmc.burn && (it - mcmc.burn) % mcmc.thin == 0 {
            let functionals = implied_functionals(&params)?;
            let z = state.z(&functionals.d0);
            let margins = if mcmc.store_margins {
                attach_margins(y, &z)?
            } else {
                Vec::new()
            };
            let latent = if mcmc.store_latent {
                state.clone()
            } else {
                LatentState {
                    x: state.x.rows(panel.len() - 1, 1).into_owned(),
                    eta: state.eta.rows(panel.len() - 1, 1).into_owned(),
                }
            };
            draws.push(PosteriorDraw {
                params: params.clone(),
                latent,
                d0: functionals.d0,
                margins,
                chain,
                iteration: it,
            });
        }
        if it % 1000 == 0 {
            debug!("chain {chain}: iteration {it}/{}", mcmc.total);
        }
    }
    Ok(PosteriorDraws {
        draws,
        names: panel.names().to_vec(),
        kinds: panel.kinds().to_vec(),
        model: mcmc.model,
        seed: mcmc.seed,
        t_len: panel.len(),
        diagnostics,
    })
}

/// Runs `mcmc.chains` chains on stream ids 0, 1, … and concatenates their
/// stored draws in chain order.
pub fn run_chain(panel: &TimeSeriesPanel, prior: &PriorHyper, mcmc: &McmcConfig) -> Result<PosteriorDraws> {
    let mut out = run_single_chain(panel, prior, mcmc, 0)?;
    for c in 1..mcmc.chains {
        let more = run_single_chain(panel, prior, mcmc, c)?;
        out.draws.extend(more.draws);
        out.diagnostics.var_proposals += more.diagnostics.var_proposals;
        out.diagnostics.var_accepted += more.diagnostics.var_accepted;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mid_ranks_average_ties() {
        assert_eq!(mid_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn stored_count_bookkeeping() {
        let mcmc = McmcConfig::with_iterations(10_000, 5_000, 5);
        assert_eq!(mcmc.kept_per_chain(), 1000);
        assert!(McmcConfig::with_iterations(10, 10, 1).validate().is_err());
        assert!(McmcConfig::with_iterations(10, 0, 0).validate().is_err());
    }

    #[test]
    fn initial_state_respects_ranks() {
        let y = Matrix::from_row_slice(5, 2, &[1.0, 3.0, 2.0, 3.0, 2.0, 1.0, 4.0, 0.0, 0.5, 2.0]);
        let prior = PriorHyper::with_k(3);
        let (state, params) = initial_state(&y, &prior, ModelKind::Factor).unwrap();
        let rank = RankStructure::from_matrix(&y);
        assert!(super::super::rank::respects_ranks(&rank, &state.x));
        assert_eq!(params.lambda.shape(), (2, 3));
        assert_eq!(params.lambda.column(2).amax(), 0.0);
        assert!(params.v.iter().all(|&v| v >= 0.05));
        assert_eq!(params.delta.as_slice(), &[2.0, 3.0, 3.0]);
    }
}
