//! Parameter and data types of the model plus the deterministic
//! stationary-process math: autocovariances, rescaling, identification,
//! stability and the rank-based oracle estimator.

mod panel;
mod params;
mod rank_estimator;

pub use panel::{DataKind, TimeSeriesPanel};
pub use params::{cumulative_products, DgfcParams, PriorHyper};
pub use rank_estimator::{kendall_lag_matrix, rank_based_var_estimator};

use crate::error::{DgfcError, Result};
use crate::linalg::{is_spd, solve_discrete_lyapunov, spectral_radius, symmetrize, Matrix, Vector};

/// Default margin on the spectral radius.
pub const STABILITY_EPS: f64 = 1e-10;

/// Stationary functionals implied by a parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryFunctionals {
    /// Stationary factor covariance Γ0.
    pub gamma0: Matrix,
    /// cov(x_t) = Λ Γ0 Λᵀ + V.
    pub omega0: Matrix,
    /// diag(Ω0).
    pub d0: Vector,
    /// corr(z_t).
    pub c0: Matrix,
    /// corr(z_t, z_{t−1}).
    pub c1: Matrix,
}

/// True iff the spectral radius of `g` is below 1 − ε with the default ε.
pub fn is_stable(g: &Matrix) -> bool {
    is_stable_with(g, STABILITY_EPS)
}

pub fn is_stable_with(g: &Matrix, eps: f64) -> bool {
    g.is_square() && spectral_radius(g) < 1.0 - eps
}

/// Γ_h = cov(η_t, η_{t−h}) = G^h Γ0 for the VAR(1) η_t = G η_{t−1} + ε_t.
pub fn stationary_autocovariance(g: &Matrix, sigma: &Matrix, h: usize) -> Result<Matrix> {
    if !is_stable(g) {
        return Err(DgfcError::Unstable {
            radius: spectral_radius(g),
        });
    }
    let mut gamma = solve_discrete_lyapunov(g, sigma)?;
    for _ in 0..h {
        gamma = g * gamma;
    }
    Ok(gamma)
}

/// Γ0, Ω0, D0, C0 and C1 of the latent process.
pub fn implied_functionals(params: &DgfcParams) -> Result<StationaryFunctionals> {
    let gamma0 = stationary_autocovariance(&params.g, &params.sigma, 0)?;
    let lambda = &params.lambda;
    let mut omega0 = lambda * &gamma0 * lambda.transpose();
    for i in 0..omega0.nrows() {
        omega0[(i, i)] += params.v[i];
    }
    let omega0 = symmetrize(&omega0);
    let d0 = omega0.diagonal();
    if let Some(i) = d0.iter().position(|&d| !(d > 0.0)) {
        return Err(DgfcError::Degenerate(format!(
            "latent variance D0[{i}] = {} is not positive",
            d0[i]
        )));
    }
    let scale = d0.map(|d| 1.0 / d.sqrt());
    let s = Matrix::from_diagonal(&scale);
    let mut c0 = &s * &omega0 * &s;
    for i in 0..c0.nrows() {
        c0[(i, i)] = 1.0;
    }
    let gamma1 = &params.g * &gamma0;
    let c1 = &s * lambda * gamma1 * lambda.transpose() * &s;
    Ok(StationaryFunctionals {
        gamma0,
        omega0,
        d0,
        c0,
        c1,
    })
}

/// Lag-0 and lag-1 correlation blocks of a VAR(1) after unit-variance
/// rescaling.
pub fn var_lag_correlations(g: &Matrix, sigma: &Matrix) -> Result<(Matrix, Matrix)> {
    let f = implied_functionals(&DgfcParams::var_copula(g.clone(), sigma.clone()))?;
    Ok((f.c0, f.c1))
}

/// Unit-variance VAR(1) parameters from lag-0/lag-1 correlation blocks:
/// G̃ = C1 C0⁻¹ and Σ̃ = C0 − G̃ C0 G̃ᵀ (the unvec of (I − G̃⊗G̃) vec C0).
pub fn identify_var_params(c0: &Matrix, c1: &Matrix) -> Result<(Matrix, Matrix)> {
    if !is_spd(c0) {
        return Err(DgfcError::Identification("C0 is not symmetric positive definite".into()));
    }
    let chol = crate::linalg::cholesky(c0, "C0")?;
    // G̃ C0 = C1  ⇔  C0 G̃ᵀ = C1ᵀ
    let g_tilde = chol.solve(&c1.transpose()).transpose();
    let sigma_tilde = symmetrize(&(c0 - &g_tilde * c0 * g_tilde.transpose()));
    if !is_spd(&sigma_tilde) {
        return Err(DgfcError::Identification(
            "implied innovation covariance is not positive definite".into(),
        ));
    }
    Ok((g_tilde, sigma_tilde))
}

/// Identified (G̃, Σ̃) for a parameter draw: (G, Σ, Λ, v) ↦ (C0, C1) ↦ (G̃, Σ̃).
pub fn identified_params(params: &DgfcParams) -> Result<(Matrix, Matrix)> {
    let f = implied_functionals(params)?;
    identify_var_params(&f.c0, &f.c1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn m(r: usize, c: usize, v: &[f64]) -> Matrix {
        Matrix::from_row_slice(r, c, v)
    }

    #[test]
    fn no_dynamics_gives_sigma() {
        let sigma = m(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let g = Matrix::zeros(2, 2);
        assert_eq!(stationary_autocovariance(&g, &sigma, 0).unwrap(), sigma);
        assert_eq!(stationary_autocovariance(&g, &sigma, 1).unwrap(), Matrix::zeros(2, 2));
    }

    #[test]
    fn scalar_ar1() {
        let g = m(1, 1, &[0.5]);
        let s = m(1, 1, &[0.75]);
        assert_relative_eq!(stationary_autocovariance(&g, &s, 0).unwrap()[(0, 0)], 1.0, epsilon = 1e-14);
        assert_relative_eq!(stationary_autocovariance(&g, &s, 1).unwrap()[(0, 0)], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn unstable_rejected() {
        let g = Matrix::identity(2, 2);
        assert!(matches!(
            stationary_autocovariance(&g, &Matrix::identity(2, 2), 0),
            Err(DgfcError::Unstable { .. })
        ));
    }

    #[test]
    fn stability_boundary() {
        assert!(is_stable(&Matrix::zeros(3, 3)));
        assert!(!is_stable(&Matrix::identity(2, 2)));
        assert!(is_stable(&m(1, 1, &[0.999999])));
        assert!(!is_stable(&m(1, 1, &[1.0])));
    }

    #[test]
    fn lyapunov_residual_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let k = rng.random_range(1..6);
            let g = random_stable(&mut rng, k);
            let a = Matrix::from_fn(k, k, |_, _| rng.sample::<f64, _>(StandardNormal));
            let sigma = &a * a.transpose() + Matrix::identity(k, k) * 0.1;
            let g0 = stationary_autocovariance(&g, &sigma, 0).unwrap();
            let resid = &g0 - &g * &g0 * g.transpose() - &sigma;
            assert!(resid.amax() < 1e-8, "residual {}", resid.amax());
        }
    }

    pub(crate) fn random_stable(rng: &mut ChaCha8Rng, k: usize) -> Matrix {
        loop {
            let g = Matrix::from_fn(k, k, |_, _| rng.sample::<f64, _>(StandardNormal) * 0.5);
            if spectral_radius(&g) < 0.95 {
                return g;
            }
        }
    }

    #[test]
    fn identity_loading_functionals() {
        let g = m(2, 2, &[0.5, 0.1, 0.0, 0.3]);
        let sigma = m(2, 2, &[1.0, 0.2, 0.2, 2.0]);
        let p = DgfcParams::var_copula(g.clone(), sigma.clone());
        let f = implied_functionals(&p).unwrap();
        assert_relative_eq!(f.omega0, f.gamma0, epsilon = 1e-14);
        let corr = crate::linalg::to_correlation(&f.gamma0).unwrap();
        assert_relative_eq!(f.c0, corr, epsilon = 1e-12);
    }

    #[test]
    fn pure_noise_functionals() {
        let p = DgfcParams::new(
            m(1, 1, &[0.4]),
            m(1, 1, &[1.0]),
            Matrix::zeros(3, 1),
            Vector::from_element(3, 1.0),
            Matrix::from_element(3, 1, 1.0),
            Vector::from_element(1, 1.0),
        );
        let f = implied_functionals(&p).unwrap();
        assert_eq!(f.c0, Matrix::identity(3, 3));
        assert_eq!(f.c1, Matrix::zeros(3, 3));
    }

    #[test]
    fn two_series_one_factor_hand_value() {
        // γ0 = 1 requires σ² = 1 − g², take g = 0
        let p = DgfcParams::new(
            m(1, 1, &[0.0]),
            m(1, 1, &[1.0]),
            m(2, 1, &[1.0, 1.0]),
            Vector::from_element(2, 1.0),
            Matrix::from_element(2, 1, 1.0),
            Vector::from_element(1, 1.0),
        );
        let f = implied_functionals(&p).unwrap();
        assert_relative_eq!(f.omega0, m(2, 2, &[2.0, 1.0, 1.0, 2.0]), epsilon = 1e-14);
        assert_relative_eq!(f.c0[(0, 1)], 0.5, epsilon = 1e-14);
        assert_eq!(f.c0[(0, 0)], 1.0);
    }

    #[test]
    fn degenerate_variance_rejected() {
        let p = DgfcParams::new(
            m(1, 1, &[0.0]),
            m(1, 1, &[1.0]),
            m(2, 1, &[1.0, 0.0]),
            Vector::from_vec(vec![0.0, 0.0]),
            Matrix::from_element(2, 1, 1.0),
            Vector::from_element(1, 1.0),
        );
        assert!(matches!(implied_functionals(&p), Err(DgfcError::Degenerate(_))));
    }

    #[test]
    fn identification_white_noise() {
        let c0 = m(2, 2, &[1.0, 0.4, 0.4, 1.0]);
        let (g, s) = identify_var_params(&c0, &Matrix::zeros(2, 2)).unwrap();
        assert_eq!(g, Matrix::zeros(2, 2));
        assert_relative_eq!(s, c0, epsilon = 1e-15);
    }

    #[test]
    fn identification_scalar() {
        let (g, s) = identify_var_params(&m(1, 1, &[1.0]), &m(1, 1, &[0.3])).unwrap();
        assert_relative_eq!(g[(0, 0)], 0.3, epsilon = 1e-15);
        assert_relative_eq!(s[(0, 0)], 0.91, epsilon = 1e-15);
    }

    #[test]
    fn identification_rejects_invalid_pair() {
        // |c1| > 1 cannot be a lag-1 correlation
        let r = identify_var_params(&m(1, 1, &[1.0]), &m(1, 1, &[1.2]));
        assert!(matches!(r, Err(DgfcError::Identification(_))));
    }
}
