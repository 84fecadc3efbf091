//! Posterior predictive simulation: one forward path per stored draw.

use rand::Rng;

use crate::error::{DgfcError, Result};
use crate::gibbs::PosteriorDraws;
use crate::linalg::{psd_factor, Matrix, Vector};
use crate::random::{norm_cdf, standard_normal, standard_normal_vector, RngStream};
use crate::stationary::{DataKind, DgfcParams};

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastConfig {
    pub horizons: usize,
    /// Indices of stored draws to use; all draws when `None`.
    pub draws: Option<Vec<usize>>,
    pub seed: u64,
}

impl ForecastConfig {
    pub fn new(horizons: usize, seed: u64) -> Self {
        Self {
            horizons,
            draws: None,
            seed,
        }
    }
}

/// M×H×n predictive values stored draw-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastDraws {
    values: Vec<f64>,
    m: usize,
    horizons: usize,
    n: usize,
    pub draw_indices: Vec<usize>,
    pub seed: u64,
    pub names: Vec<String>,
    pub kinds: Vec<DataKind>,
    /// Cells whose uniform exceeded every non-terminal height of the margin
    /// and so landed on the largest training value.
    pub terminal_hits: usize,
}

impl ForecastDraws {
    pub fn from_values(
        values: Vec<f64>,
        m: usize,
        horizons: usize,
        n: usize,
        names: Vec<String>,
        kinds: Vec<DataKind>,
    ) -> Result<Self> {
        if values.len() != m * horizons * n || names.len() != n || kinds.len() != n {
            return Err(DgfcError::Contract("forecast array dimensions disagree".into()));
        }
        Ok(Self {
            values,
            m,
            horizons,
            n,
            draw_indices: (0..m).collect(),
            seed: 0,
            names,
            kinds,
            terminal_hits: 0,
        })
    }

    pub fn n_draws(&self) -> usize {
        self.m
    }

    pub fn horizons(&self) -> usize {
        self.horizons
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, m: usize, h: usize, i: usize) -> f64 {
        self.values[(m * self.horizons + h) * self.n + i]
    }

    /// Predictive sample for horizon h (0-based) and variable i.
    pub fn sample(&self, h: usize, i: usize) -> Vec<f64> {
        (0..self.m).map(|m| self.get(m, h, i)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn terminal_fraction(&self) -> f64 {
        self.terminal_hits as f64 / self.values.len().max(1) as f64
    }
}

/// Iterates η_{T+h} = Gη_{T+h−1} + ε and x = Λη + e for h = 1..H and
/// returns z = D0^{−1/2} x as an H×n matrix.
pub fn forward_simulate_latent<R: Rng + ?Sized>(
    rng: &mut R,
    params: &DgfcParams,
    d0: &Vector,
    eta_t: &Vector,
    horizons: usize,
) -> Result<Matrix> {
    let (n, k) = (params.n(), params.k());
    if eta_t.len() != k || d0.len() != n {
        return Err(DgfcError::Contract("forecast state dimensions disagree".into()));
    }
    if d0.iter().any(|&d| !(d > 0.0)) {
        return Err(DgfcError::Degenerate("D0 must be positive".into()));
    }
    let ls = psd_factor(&params.sigma);
    let sd_v = params.v.map(f64::sqrt);
    let scale = d0.map(|d| 1.0 / d.sqrt());
    let mut eta = eta_t.clone();
    let mut z = Matrix::zeros(horizons, n);
    for h in 0..horizons {
        eta = &params.g * &eta + &ls * standard_normal_vector(rng, k);
        let mean = &params.lambda * &eta;
        for i in 0..n {
            let x = mean[i] + sd_v[i] * standard_normal(rng);
            z[(h, i)] = x * scale[i];
        }
    }
    Ok(z)
}

/// One predictive path per selected draw: forward-simulate z, then map
/// y = F̃⁻¹(Φ(z)) with that draw's margin adjustment. Draw m uses RNG
/// stream m of `cfg.seed`.
pub fn posterior_predictive(draws: &PosteriorDraws, cfg: &ForecastConfig) -> Result<ForecastDraws> {
    if draws.is_empty() {
        return Err(DgfcError::Contract("no posterior draws to forecast from".into()));
    }
    if cfg.horizons == 0 {
        return Err(DgfcError::Validation("forecast horizon must be at least 1".into()));
    }
    let indices: Vec<usize> = cfg.draws.clone().unwrap_or_else(|| (0..draws.len()).collect());
    if let Some(&bad) = indices.iter().find(|&&m| m >= draws.len()) {
        return Err(DgfcError::Validation(format!("draw index {bad} out of range")));
    }
    let n = draws.n();
    let mut values = Vec::with_capacity(indices.len() * cfg.horizons * n);
    let mut terminal_hits = 0;
    for &m in &indices {
        let draw = &draws.draws[m];
        if draw.margins.len() != n {
            return Err(DgfcError::Contract("stored draws carry no margin adjustment".into()));
        }
        let mut rng = RngStream::new(cfg.seed, m as u64).rng();
        let z = forward_simulate_latent(&mut rng, &draw.params, &draw.d0, &draw.latent.final_factor(), cfg.horizons)?;
        for h in 0..cfg.horizons {
            for i in 0..n {
                let u = norm_cdf(z[(h, i)]).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
                let margin = &draw.margins[i];
                let heights = margin.heights();
                if heights.len() >= 2 && u > heights[heights.len() - 2] {
                    terminal_hits += 1;
                }
                values.push(margin.quantile(u)?);
            }
        }
    }
    Ok(ForecastDraws {
        values,
        m: indices.len(),
        horizons: cfg.horizons,
        n,
        draw_indices: indices,
        seed: cfg.seed,
        names: draws.names.clone(),
        kinds: draws.kinds.clone(),
        terminal_hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_skeleton() {
        let g = Matrix::from_row_slice(2, 2, &[0.5, 0.2, -0.1, 0.4]);
        let lambda = Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.5, 1.0, -1.0, 2.0]);
        let params = DgfcParams::new(
            g.clone(),
            Matrix::zeros(2, 2),
            lambda.clone(),
            Vector::zeros(3),
            Matrix::from_element(3, 2, 1.0),
            Vector::from_element(2, 1.0),
        );
        let d0 = Vector::from_column_slice(&[2.0, 0.5, 3.0]);
        let eta_t = Vector::from_column_slice(&[1.0, -2.0]);
        let mut rng = RngStream::new(1, 0).rng();
        let z = forward_simulate_latent(&mut rng, &params, &d0, &eta_t, 4).unwrap();
        let mut state = eta_t.clone();
        for h in 0..4 {
            state = &g * state;
            let x = &lambda * &state;
            for i in 0..3 {
                assert!((z[(h, i)] - x[i] / d0[i].sqrt()).abs() < 1e-14);
            }
        }
    }
}
