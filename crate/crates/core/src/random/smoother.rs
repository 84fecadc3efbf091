//! Kalman filtering and mean-correction simulation smoothing for
//!
//!   η_1 ~ N(0, Γ0),  η_t = G η_{t−1} + ε_t,  ε_t ~ N(0, Σ)
//!   x_t = Λ η_t + e_t,  e_t ~ N(0, diag(v)).
//!
//! The filter uses the information-form update, which only inverts k×k
//! matrices because V is diagonal.

use rand::Rng;

use super::samplers::{sample_mvn_chol, standard_normal};
use crate::error::{DgfcError, Result};
use crate::linalg::{chol_lower, symmetrize, Matrix, Vector};

/// Linear Gaussian state space system driven by the factor VAR.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceSpec {
    pub lambda: Matrix,
    pub v: Vector,
    pub g: Matrix,
    pub sigma: Matrix,
    pub gamma0: Matrix,
}

impl StateSpaceSpec {
    pub fn n(&self) -> usize {
        self.lambda.nrows()
    }

    pub fn k(&self) -> usize {
        self.lambda.ncols()
    }

    fn validate(&self, x: &Matrix) -> Result<()> {
        let (n, k) = (self.n(), self.k());
        if self.v.len() != n
            || self.g.shape() != (k, k)
            || self.sigma.shape() != (k, k)
            || self.gamma0.shape() != (k, k)
            || x.ncols() != n
        {
            return Err(DgfcError::Contract("state space dimensions are inconsistent".into()));
        }
        if x.nrows() == 0 {
            return Err(DgfcError::Contract("smoother needs T >= 1".into()));
        }
        if self.v.iter().any(|&v| !(v > 0.0)) {
            return Err(DgfcError::Contract("observation variances must be positive".into()));
        }
        Ok(())
    }
}

/// Data-independent filter quantities: the gains K_t = P_{t|t} Λᵀ V⁻¹ and
/// smoother gains J_t = P_{t|t} Gᵀ P_{t+1|t}⁻¹.
struct Gains {
    filter: Vec<Matrix>,
    smooth: Vec<Matrix>,
}

fn gains(spec: &StateSpaceSpec, t_len: usize) -> Result<Gains> {
    let k = spec.k();
    let vinv = spec.v.map(|v| 1.0 / v);
    let lt_vinv = {
        let mut m = spec.lambda.transpose();
        for (j, mut col) in m.column_iter_mut().enumerate() {
            col *= vinv[j];
        }
        m
    };
    let info = &lt_vinv * &spec.lambda;
    let mut filter = Vec::with_capacity(t_len);
    let mut smooth = Vec::with_capacity(t_len.saturating_sub(1));
    let mut p_pred = spec.gamma0.clone();
    for t in 0..t_len {
        let pred_chol = nalgebra::Cholesky::new(symmetrize(&p_pred))
            .ok_or(DgfcError::FilterBreakdown { time: t + 1 })?;
        let precision = pred_chol.inverse() + &info;
        let p_filt = nalgebra::Cholesky::new(symmetrize(&precision))
            .ok_or(DgfcError::FilterBreakdown { time: t + 1 })?
            .inverse();
        filter.push(&p_filt * &lt_vinv);
        if t + 1 < t_len {
            let next = symmetrize(&(&spec.g * &p_filt * spec.g.transpose() + &spec.sigma));
            let next_chol = nalgebra::Cholesky::new(next.clone())
                .ok_or(DgfcError::FilterBreakdown { time: t + 2 })?;
            // J = P_f Gᵀ P_next⁻¹  ⇔  P_next Jᵀ = G P_f
            let j = next_chol.solve(&(&spec.g * &p_filt)).transpose();
            smooth.push(j);
            p_pred = next;
        }
    }
    debug_assert_eq!(filter.first().map(|m| m.nrows()), Some(k));
    Ok(Gains { filter, smooth })
}

fn smoothed_mean_with(spec: &StateSpaceSpec, gains: &Gains, x: &Matrix) -> Matrix {
    let t_len = x.nrows();
    let k = spec.k();
    let mut filt = Matrix::zeros(t_len, k);
    let mut pred = Matrix::zeros(t_len, k);
    let mut a_pred = Vector::zeros(k);
    for t in 0..t_len {
        let xt = x.row(t).transpose();
        let innov = xt - &spec.lambda * &a_pred;
        let a_filt = &a_pred + &gains.filter[t] * innov;
        pred.set_row(t, &a_pred.transpose());
        filt.set_row(t, &a_filt.transpose());
        a_pred = &spec.g * &a_filt;
    }
    let mut out = filt.clone();
    for t in (0..t_len.saturating_sub(1)).rev() {
        let diff = (out.row(t + 1) - pred.row(t + 1)).transpose();
        let s = filt.row(t).transpose() + &gains.smooth[t] * diff;
        out.set_row(t, &s.transpose());
    }
    out
}

/// E[η_{1:T} | x_{1:T}] as a T×k matrix (Kalman filter + RTS smoother).
pub fn kalman_smoothed_mean(spec: &StateSpaceSpec, x: &Matrix) -> Result<Matrix> {
    spec.validate(x)?;
    let g = gains(spec, x.nrows())?;
    Ok(smoothed_mean_with(spec, &g, x))
}

/// Exact draw of η_{1:T} from p(η_{1:T} | x_{1:T}) by mean correction:
/// simulate (η⁺, x⁺) from the model, then
/// η = η⁺ + E[η | x] − E[η⁺ | x⁺] = η⁺ + E[η | x − x⁺].
pub fn kalman_simulation_smoother<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &StateSpaceSpec,
    x: &Matrix,
) -> Result<Matrix> {
    spec.validate(x)?;
    let (t_len, n, k) = (x.nrows(), spec.n(), spec.k());
    let gains = gains(spec, t_len)?;
    let l0 = chol_lower(&spec.gamma0, "Gamma0")?;
    let ls = chol_lower(&spec.sigma, "Sigma")?;
    let sd = spec.v.map(f64::sqrt);
    let mut eta_plus = Matrix::zeros(t_len, k);
    let mut resid = x.clone();
    let mut state = sample_mvn_chol(rng, &Vector::zeros(k), &l0);
    for t in 0..t_len {
        if t > 0 {
            state = sample_mvn_chol(rng, &(&spec.g * &state), &ls);
        }
        eta_plus.set_row(t, &state.transpose());
        let mean = &spec.lambda * &state;
        for i in 0..n {
            let x_plus = mean[i] + sd[i] * standard_normal(rng);
            resid[(t, i)] -= x_plus;
        }
    }
    Ok(eta_plus + smoothed_mean_with(spec, &gains, &resid))
}
