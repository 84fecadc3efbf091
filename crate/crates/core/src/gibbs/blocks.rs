//! Full-conditional draws for each block of the sweep.

use rand::Rng;

use super::rank::{compute_rank_bounds, RankStructure};
use crate::error::{DgfcError, Result};
use crate::linalg::{cholesky, inverse_spd, symmetrize, Matrix, Vector};
use crate::random::{
    kalman_simulation_smoother, sample_gamma, sample_mniw, sample_truncated_normal,
    standard_normal_vector, StateSpaceSpec,
};
use crate::stationary::{is_stable, stationary_autocovariance, DgfcParams, PriorHyper};

/// Posterior MNIW parameters of (G, Σ) given a factor path.
#[derive(Debug, Clone, PartialEq)]
pub struct VarPosterior {
    pub d: f64,
    pub psi: Matrix,
    /// Posterior mean of Gᵀ.
    pub gbar_t: Matrix,
    pub o: Matrix,
    pub o_inv: Matrix,
}

/// Conjugate update with pseudo-data Y = η_{2:T}, X = η_{1:T−1}.
pub fn var_posterior(eta: &Matrix, prior: &PriorHyper) -> Result<VarPosterior> {
    let (t_len, k) = eta.shape();
    if k != prior.k {
        return Err(DgfcError::Contract(format!(
            "factor path has {k} columns but the prior has k = {}",
            prior.k
        )));
    }
    let m = t_len.saturating_sub(1);
    let x = eta.rows(0, m).into_owned();
    let y = eta.rows(1.min(t_len), m).into_owned();
    let xt = x.transpose();
    let o = symmetrize(&(&xt * &x + &prior.o0));
    let o_inv = inverse_spd(&o, "posterior O")?;
    let gbar0_t = prior.gbar0.transpose();
    let gbar_t = &o_inv * (&xt * &y + &prior.o0 * &gbar0_t);
    let resid = &y - &x * &gbar_t;
    let dev = &gbar_t - &gbar0_t;
    let psi = symmetrize(&(&prior.psi0 + resid.transpose() * &resid + dev.transpose() * &prior.o0 * &dev));
    Ok(VarPosterior {
        d: prior.d0 + m as f64,
        psi,
        gbar_t,
        o,
        o_inv: symmetrize(&o_inv),
    })
}

/// MNIW posterior draw of (G, Σ), redrawn until G is stable.
pub fn draw_var_block<R: Rng + ?Sized>(
    rng: &mut R,
    eta: &Matrix,
    prior: &PriorHyper,
    cap: usize,
    iteration: usize,
) -> Result<(Matrix, Matrix)> {
    let post = var_posterior(eta, prior)?;
    draw_stable_mniw(rng, &post, cap, iteration)
}

pub fn draw_stable_mniw<R: Rng + ?Sized>(
    rng: &mut R,
    post: &VarPosterior,
    cap: usize,
    iteration: usize,
) -> Result<(Matrix, Matrix)> {
    for _ in 0..=cap {
        let (g, sigma) = sample_mniw(rng, post.d, &post.psi, &post.gbar_t, &post.o_inv)?;
        if is_stable(&g) {
            return Ok((g, sigma));
        }
    }
    Err(DgfcError::Sampler {
        iteration,
        message: format!("no stable transition after {cap} redraws of the VAR block"),
    })
}

/// log N(η₁; 0, Γ0(G, Σ)).
pub fn log_initial_density(eta1: &Vector, g: &Matrix, sigma: &Matrix) -> Result<f64> {
    let gamma0 = stationary_autocovariance(g, sigma, 0)?;
    let chol = cholesky(&gamma0, "Gamma0")?;
    let sol = chol.solve(eta1);
    let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let k = eta1.len() as f64;
    Ok(-0.5 * (k * (2.0 * std::f64::consts::PI).ln() + log_det + eta1.dot(&sol)))
}

/// Independence Metropolis–Hastings step that accounts for η₁ ~ N(0, Γ0):
/// the conjugate proposal ignores that term, so the acceptance ratio is
/// the ratio of the initial-state densities.
pub fn accept_var_proposal<R: Rng + ?Sized>(
    rng: &mut R,
    eta1: &Vector,
    current: (&Matrix, &Matrix),
    proposal: (&Matrix, &Matrix),
) -> Result<bool> {
    let log_new = log_initial_density(eta1, proposal.0, proposal.1)?;
    let log_old = log_initial_density(eta1, current.0, current.1)?;
    let u: f64 = rng.random();
    Ok(u.ln() < log_new - log_old)
}

pub fn state_space_spec(params: &DgfcParams) -> Result<StateSpaceSpec> {
    Ok(StateSpaceSpec {
        lambda: params.lambda.clone(),
        v: params.v.clone(),
        g: params.g.clone(),
        sigma: params.sigma.clone(),
        gamma0: stationary_autocovariance(&params.g, &params.sigma, 0)?,
    })
}

/// Factor path from the simulation smoother, with Γ0 taken from the
/// current (G, Σ).
pub fn draw_factors<R: Rng + ?Sized>(rng: &mut R, x: &Matrix, params: &DgfcParams) -> Result<Matrix> {
    let spec = state_space_spec(params)?;
    kalman_simulation_smoother(rng, &spec, x)
}

/// Mean and covariance of λ_i given x_i and the factors, with prior
/// precision diag(φ_{i,l} τ_l).
pub fn loading_posterior(
    x_i: &Vector,
    eta: &Matrix,
    v_i: f64,
    prior_precision: &Vector,
) -> Result<(Vector, Matrix)> {
    let a = Matrix::from_diagonal(prior_precision) + eta.transpose() * eta / v_i;
    let chol = cholesky(&symmetrize(&a), "loading precision")?;
    let mean = chol.solve(&(eta.transpose() * x_i)) / v_i;
    Ok((mean, chol.inverse()))
}

pub fn draw_loadings<R: Rng + ?Sized>(
    rng: &mut R,
    x: &Matrix,
    eta: &Matrix,
    v: &Vector,
    phi: &Matrix,
    tau: &Vector,
) -> Result<Matrix> {
    let (n, k) = (x.ncols(), eta.ncols());
    let ntn = eta.transpose() * eta;
    let ntx = eta.transpose() * x;
    let mut lambda = Matrix::zeros(n, k);
    for i in 0..n {
        let mut a = &ntn / v[i];
        for l in 0..k {
            a[(l, l)] += phi[(i, l)] * tau[l];
        }
        let chol = cholesky(&symmetrize(&a), "loading precision")?;
        let mean = chol.solve(&ntx.column(i).into_owned()) / v[i];
        // A = L Lᵀ, so L⁻ᵀ z has covariance A⁻¹
        let z = standard_normal_vector(rng, k);
        let dev = chol
            .l()
            .transpose()
            .solve_upper_triangular(&z)
            .ok_or_else(|| DgfcError::Numeric("singular loading precision".into()))?;
        lambda.set_row(i, &(mean + dev).transpose());
    }
    Ok(lambda)
}

/// Gamma rates β0 + ½ Σ_t (x_{t,i} − λ_iᵀη_t)² of the precision updates.
pub fn variance_rates(x: &Matrix, eta: &Matrix, lambda: &Matrix, beta0: f64) -> Vector {
    let resid = x - eta * lambda.transpose();
    Vector::from_iterator(
        x.ncols(),
        resid.column_iter().map(|c| beta0 + 0.5 * c.norm_squared()),
    )
}

pub fn draw_variances<R: Rng + ?Sized>(
    rng: &mut R,
    x: &Matrix,
    eta: &Matrix,
    lambda: &Matrix,
    alpha0: f64,
    beta0: f64,
) -> Result<Vector> {
    let shape = alpha0 + 0.5 * x.nrows() as f64;
    let rates = variance_rates(x, eta, lambda, beta0);
    let mut v = Vector::zeros(x.ncols());
    for i in 0..x.ncols() {
        v[i] = 1.0 / sample_gamma(rng, shape, rates[i])?;
    }
    Ok(v)
}

pub fn draw_local_scales<R: Rng + ?Sized>(
    rng: &mut R,
    lambda: &Matrix,
    tau: &Vector,
    nu0: f64,
) -> Result<Matrix> {
    let (n, k) = lambda.shape();
    let shape = 0.5 * (nu0 + 1.0);
    let mut phi = Matrix::zeros(n, k);
    for i in 0..n {
        for l in 0..k {
            let rate = 0.5 * (nu0 + tau[l] * lambda[(i, l)].powi(2));
            phi[(i, l)] = sample_gamma(rng, shape, rate)?;
        }
    }
    Ok(phi)
}

/// Shape of the δ_s update (s is 1-based).
pub fn global_scale_shape(s: usize, n: usize, k: usize, a0: f64, b0: f64) -> f64 {
    let base = if s == 1 { a0 } else { b0 };
    base + 0.5 * (n * (k - s + 1)) as f64
}

/// Rate of the δ_s update (s is 1-based): 1 + ½ Σ_{l≥s} τ_l^{(s)} Σ_i φ_{i,l} λ²_{i,l},
/// where τ_l^{(s)} omits δ_s from the product.
pub fn global_scale_rate(s: usize, lambda: &Matrix, phi: &Matrix, delta: &Vector) -> f64 {
    let k = lambda.ncols();
    let mut rate = 1.0;
    let mut partial = 1.0;
    for l in 0..k {
        if l + 1 != s {
            partial *= delta[l];
        }
        if l + 1 >= s {
            let col: f64 = (0..lambda.nrows())
                .map(|i| phi[(i, l)] * lambda[(i, l)].powi(2))
                .sum();
            rate += 0.5 * partial * col;
        }
    }
    rate
}

/// Sequential δ_1, …, δ_k updates; returns (δ, τ).
pub fn draw_global_scales<R: Rng + ?Sized>(
    rng: &mut R,
    lambda: &Matrix,
    phi: &Matrix,
    delta: &Vector,
    a0: f64,
    b0: f64,
) -> Result<(Vector, Vector)> {
    let (n, k) = lambda.shape();
    let mut delta = delta.clone();
    for s in 1..=k {
        let shape = global_scale_shape(s, n, k, a0, b0);
        let rate = global_scale_rate(s, lambda, phi, &delta);
        delta[s - 1] = sample_gamma(rng, shape, rate)?;
    }
    let tau = crate::stationary::cumulative_products(&delta);
    Ok((delta, tau))
}

/// Redraws x_{t,i} from N(λ_iᵀη_t, v_i) truncated to its rank bounds and
/// writes it back into x.
pub fn draw_latent_cell<R: Rng + ?Sized>(
    rng: &mut R,
    rank: &RankStructure,
    x: &mut Matrix,
    eta: &Matrix,
    params: &DgfcParams,
    t: usize,
    i: usize,
) -> Result<f64> {
    let mean = params.lambda.row(i).dot(&eta.row(t));
    let (lo, hi) = compute_rank_bounds(rank, x, t, i);
    let draw = sample_truncated_normal(rng, mean, params.v[i], lo, hi)?;
    x[(t, i)] = draw;
    Ok(draw)
}

/// Precisions of η_t given its neighbours in a VAR(1) with η₁ ~ N(0, Γ0).
#[derive(Debug, Clone)]
pub struct VarNeighbourPrecisions {
    sigma_inv: Matrix,
    gt_sigma_inv: Matrix,
    first: Matrix,
    middle: Matrix,
    last: Matrix,
    single: Matrix,
    g: Matrix,
}

impl VarNeighbourPrecisions {
    pub fn new(g: &Matrix, sigma: &Matrix) -> Result<Self> {
        let gamma0 = stationary_autocovariance(g, sigma, 0)?;
        let gamma0_inv = inverse_spd(&gamma0, "Gamma0")?;
        let sigma_inv = inverse_spd(sigma, "Sigma")?;
        let gt_sigma_inv = g.transpose() * &sigma_inv;
        let back = &gt_sigma_inv * g;
        Ok(Self {
            first: symmetrize(&(&gamma0_inv + &back)),
            middle: symmetrize(&(&sigma_inv + &back)),
            last: sigma_inv.clone(),
            single: gamma0_inv,
            sigma_inv,
            gt_sigma_inv,
            g: g.clone(),
        })
    }

    /// Mean and variance of η_{t,i} given every other entry of the path.
    pub fn conditional(&self, eta: &Matrix, t: usize, i: usize) -> (f64, f64) {
        let t_len = eta.nrows();
        let k = eta.ncols();
        let mut b = Vector::zeros(k);
        if t > 0 {
            b += &self.sigma_inv * (&self.g * eta.row(t - 1).transpose());
        }
        if t + 1 < t_len {
            b += &self.gt_sigma_inv * eta.row(t + 1).transpose();
        }
        let q = match (t == 0, t + 1 == t_len) {
            (true, true) => &self.single,
            (true, false) => &self.first,
            (false, true) => &self.last,
            (false, false) => &self.middle,
        };
        let qii = q[(i, i)];
        let mut num = b[i];
        for j in 0..k {
            if j != i {
                num -= q[(i, j)] * eta[(t, j)];
            }
        }
        (num / qii, 1.0 / qii)
    }
}

/// Latent update for the VAR copula (Λ = I, V = 0): x_{t,i} = η_{t,i} is
/// drawn from its full conditional given the rest of the path.
pub fn draw_var_copula_cell<R: Rng + ?Sized>(
    rng: &mut R,
    rank: &RankStructure,
    x: &mut Matrix,
    prec: &VarNeighbourPrecisions,
    t: usize,
    i: usize,
) -> Result<f64> {
    let (mean, var) = prec.conditional(x, t, i);
    let (lo, hi) = compute_rank_bounds(rank, x, t, i);
    let draw = sample_truncated_normal(rng, mean, var, lo, hi)?;
    x[(t, i)] = draw;
    Ok(draw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::RngStream;

    #[test]
    fn zero_data_loading_mean() {
        let eta = Matrix::from_row_slice(4, 2, &[1.0, 0.0, 0.5, -1.0, 0.3, 0.2, -0.4, 1.0]);
        let (mean, cov) = loading_posterior(&Vector::zeros(4), &eta, 0.5, &Vector::from_element(2, 1.0)).unwrap();
        assert_eq!(mean, Vector::zeros(2));
        let a = Matrix::identity(2, 2) + eta.transpose() * &eta / 0.5;
        assert!((cov * a - Matrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn shapes_follow_formula() {
        for k in 1..5 {
            for s in 1..=k {
                let expect = if s == 1 { 2.0 } else { 3.0 } + 0.5 * (3 * (k - s + 1)) as f64;
                assert_eq!(global_scale_shape(s, 3, k, 2.0, 3.0), expect);
            }
        }
    }

    #[test]
    fn leave_one_out_rate() {
        let lambda = Matrix::from_row_slice(2, 3, &[1.0, 2.0, 0.5, -1.0, 0.3, 2.0]);
        let phi = Matrix::from_row_slice(2, 3, &[1.0, 0.5, 2.0, 1.5, 1.0, 0.2]);
        let delta = Vector::from_column_slice(&[2.0, 3.0, 0.5]);
        let col = |l: usize| (0..2).map(|i| phi[(i, l)] * lambda[(i, l)].powi(2)).sum::<f64>();
        let r2 = 1.0 + 0.5 * (2.0 * col(1) + 2.0 * 0.5 * col(2));
        assert!((global_scale_rate(2, &lambda, &phi, &delta) - r2).abs() < 1e-12);
        let r1 = 1.0 + 0.5 * (col(0) + 3.0 * col(1) + 1.5 * col(2));
        assert!((global_scale_rate(1, &lambda, &phi, &delta) - r1).abs() < 1e-12);
    }

    #[test]
    fn var_posterior_single_time_is_prior() {
        let prior = PriorHyper::with_k(2);
        let post = var_posterior(&Matrix::from_row_slice(1, 2, &[0.3, -0.2]), &prior).unwrap();
        assert_eq!(post.d, prior.d0);
        assert_eq!(post.psi, prior.psi0);
        assert_eq!(post.o, prior.o0);
        assert_eq!(post.gbar_t, prior.gbar0.transpose());
    }

    #[test]
    fn neighbour_conditional_matches_dense_precision() {
        let g = Matrix::from_row_slice(2, 2, &[0.5, 0.2, -0.1, 0.3]);
        let sigma = Matrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.8]);
        let prec = VarNeighbourPrecisions::new(&g, &sigma).unwrap();
        let t_len = 4;
        // dense joint covariance of vec of the path, time-major
        let mut cov = Matrix::zeros(2 * t_len, 2 * t_len);
        for s in 0..t_len {
            for t in 0..t_len {
                let h = s.abs_diff(t);
                let gh = stationary_autocovariance(&g, &sigma, h).unwrap();
                let block = if s >= t { gh } else { gh.transpose() };
                cov.view_mut((2 * s, 2 * t), (2, 2)).copy_from(&block);
            }
        }
        let q = cov.try_inverse().unwrap();
        let mut rng = RngStream::new(5, 0).rng();
        let eta = Matrix::from_iterator(t_len, 2, standard_normal_vector(&mut rng, 2 * t_len).iter().copied());
        for t in 0..t_len {
            for i in 0..2 {
                let idx = 2 * t + i;
                let mut num = 0.0;
                for s in 0..t_len {
                    for j in 0..2 {
                        if 2 * s + j != idx {
                            num -= q[(idx, 2 * s + j)] * eta[(s, j)];
                        }
                    }
                }
                let (m, v) = prec.conditional(&eta, t, i);
                assert!((m - num / q[(idx, idx)]).abs() < 1e-9, "t={t} i={i}");
                assert!((v - 1.0 / q[(idx, idx)]).abs() < 1e-9);
            }
        }
    }
}
