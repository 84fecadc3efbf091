use crate::error::{DgfcError, Result};
use crate::linalg::{is_spd, Matrix, Vector};

use super::is_stable;

/// Copula parameters: factor VAR (G, Σ), loadings Λ, idiosyncratic
/// variances v, and the shrinkage scales Φ, δ, τ.
#[derive(Debug, Clone, PartialEq)]
pub struct DgfcParams {
    /// k×k factor transition.
    pub g: Matrix,
    /// k×k factor innovation covariance.
    pub sigma: Matrix,
    /// n×k loadings.
    pub lambda: Matrix,
    /// Diagonal of V, length n.
    pub v: Vector,
    /// n×k local scales.
    pub phi: Matrix,
    /// Multiplicative increments; τ_l = ∏_{h≤l} δ_h.
    pub delta: Vector,
    /// Global scales, length k.
    pub tau: Vector,
}

impl DgfcParams {
    pub fn n(&self) -> usize {
        self.lambda.nrows()
    }

    pub fn k(&self) -> usize {
        self.g.nrows()
    }

    /// Builds params with τ computed from δ.
    pub fn new(
        g: Matrix,
        sigma: Matrix,
        lambda: Matrix,
        v: Vector,
        phi: Matrix,
        delta: Vector,
    ) -> Self {
        let tau = cumulative_products(&delta);
        Self {
            g,
            sigma,
            lambda,
            v,
            phi,
            delta,
            tau,
        }
    }

    /// Loadings/variances/scales set so that x_t = η_t exactly (Λ = I,
    /// V = 0). This is the plain VAR(1) copula.
    pub fn var_copula(g: Matrix, sigma: Matrix) -> Self {
        let k = g.nrows();
        Self::new(
            g,
            sigma,
            Matrix::identity(k, k),
            Vector::zeros(k),
            Matrix::from_element(k, k, 1.0),
            Vector::from_element(k, 1.0),
        )
    }

    /// Checks every invariant. `allow_zero_v` admits the V = 0 VAR copula.
    pub fn validate(&self, allow_zero_v: bool) -> Result<()> {
        let (n, k) = (self.n(), self.k());
        let dims_ok = self.g.ncols() == k
            && self.sigma.shape() == (k, k)
            && self.lambda.ncols() == k
            && self.v.len() == n
            && self.phi.shape() == (n, k)
            && self.delta.len() == k
            && self.tau.len() == k;
        if !dims_ok {
            return Err(DgfcError::Contract("inconsistent parameter dimensions".into()));
        }
        if !is_stable(&self.g) {
            return Err(DgfcError::Unstable {
                radius: crate::linalg::spectral_radius(&self.g),
            });
        }
        if !is_spd(&self.sigma) {
            return Err(DgfcError::Numeric("Sigma is not symmetric positive definite".into()));
        }
        let v_ok = self
            .v
            .iter()
            .all(|&x| if allow_zero_v { x >= 0.0 } else { x > 0.0 });
        if !v_ok {
            return Err(DgfcError::Contract("idiosyncratic variances must be positive".into()));
        }
        if self.phi.iter().any(|&x| x <= 0.0)
            || self.delta.iter().any(|&x| x <= 0.0)
            || self.tau.iter().any(|&x| x <= 0.0)
        {
            return Err(DgfcError::Contract("shrinkage scales must be positive".into()));
        }
        Ok(())
    }
}

pub fn cumulative_products(delta: &Vector) -> Vector {
    let mut acc = 1.0;
    Vector::from_iterator(
        delta.len(),
        delta.iter().map(|d| {
            acc *= d;
            acc
        }),
    )
}

/// Prior hyperparameters: MNIW on (Gᵀ, Σ), Gamma on 1/v, and the
/// multiplicative gamma process on the loadings.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorHyper {
    pub k: usize,
    pub d0: f64,
    pub psi0: Matrix,
    pub gbar0: Matrix,
    pub o0: Matrix,
    pub alpha0: f64,
    pub beta0: f64,
    pub nu0: f64,
    pub a0: f64,
    pub b0: f64,
}

impl PriorHyper {
    /// Default factor count ⌈0.7 n⌉.
    pub fn default_k(n: usize) -> usize {
        ((0.7 * n as f64).ceil() as usize).max(1)
    }

    /// Default hyperparameters for a panel with `n` series.
    pub fn default_for(n: usize) -> Self {
        Self::with_k(Self::default_k(n))
    }

    /// Default hyperparameters with an explicit factor count.
    pub fn with_k(k: usize) -> Self {
        Self {
            k,
            d0: k as f64 + 1.0,
            psi0: Matrix::identity(k, k),
            gbar0: Matrix::zeros(k, k),
            o0: Matrix::identity(k, k),
            alpha0: 1.0,
            beta0: 0.3,
            nu0: 3.0,
            a0: 2.0,
            b0: 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k;
        if k == 0 {
            return Err(DgfcError::Validation("factor count k must be at least 1".into()));
        }
        if self.d0 <= k as f64 - 1.0 {
            return Err(DgfcError::Validation(format!(
                "d0 = {} must exceed k - 1 = {}",
                self.d0,
                k - 1
            )));
        }
        if self.psi0.shape() != (k, k) || self.gbar0.shape() != (k, k) || self.o0.shape() != (k, k)
        {
            return Err(DgfcError::Validation("prior matrices must be k×k".into()));
        }
        if !is_spd(&self.psi0) || !is_spd(&self.o0) {
            return Err(DgfcError::Validation("Psi0 and O0 must be SPD".into()));
        }
        for (name, x) in [
            ("alpha0", self.alpha0),
            ("beta0", self.beta0),
            ("nu0", self.nu0),
            ("a0", self.a0),
            ("b0", self.b0),
        ] {
            if !(x > 0.0) {
                return Err(DgfcError::Validation(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_prior_values() {
        let p = PriorHyper::default_for(3);
        assert_eq!(p.k, 3);
        assert_eq!(p.d0, 4.0);
        assert_eq!(p.alpha0, 1.0);
        assert_eq!(p.beta0, 0.3);
        assert_eq!(p.nu0, 3.0);
        assert_eq!(p.a0, 2.0);
        assert_eq!(p.b0, 3.0);
        assert_eq!(PriorHyper::default_k(2), 2);
        assert_eq!(PriorHyper::default_k(10), 7);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn tau_is_cumulative_product() {
        let tau = cumulative_products(&Vector::from_vec(vec![2.0, 3.0, 0.5]));
        assert_eq!(tau.as_slice(), &[2.0, 6.0, 3.0]);
    }
}
