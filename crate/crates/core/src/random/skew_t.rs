//! Azzalini–Capitanio skew-t distribution.
//!
//! Density (2/σ) t_ν(w) T_{ν+1}(α w √((ν+1)/(ν+w²))) with w = (x−μ)/σ.
//! The CDF integrates the density numerically after mapping the real line
//! onto (−π/2, π/2) with w = tan θ.

use rand::Rng;
use statrs::distribution::{Continuous, ContinuousCDF, StudentsT};

use super::samplers::{sample_gamma, standard_normal};
use crate::error::{DgfcError, Result};
use crate::numerics::{brent, integrate};

const QUAD_TOL: f64 = 1e-12;
const ROOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone)]
pub struct SkewT {
    df: f64,
    mu: f64,
    sigma: f64,
    alpha: f64,
    base: StudentsT,
    shifted: StudentsT,
}

impl SkewT {
    pub fn new(df: f64, mu: f64, sigma: f64, alpha: f64) -> Result<Self> {
        if !(df > 0.0 && sigma > 0.0) || !mu.is_finite() || !alpha.is_finite() {
            return Err(DgfcError::Contract(format!(
                "skew-t needs df > 0 and sigma > 0, got df={df}, sigma={sigma}"
            )));
        }
        let base = StudentsT::new(0.0, 1.0, df).map_err(|e| DgfcError::Numeric(e.to_string()))?;
        let shifted =
            StudentsT::new(0.0, 1.0, df + 1.0).map_err(|e| DgfcError::Numeric(e.to_string()))?;
        Ok(Self {
            df,
            mu,
            sigma,
            alpha,
            base,
            shifted,
        })
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    fn std_pdf(&self, w: f64) -> f64 {
        if !w.is_finite() {
            return 0.0;
        }
        let arg = self.alpha * w * ((self.df + 1.0) / (self.df + w * w)).sqrt();
        2.0 * self.base.pdf(w) * self.shifted.cdf(arg)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.std_pdf((x - self.mu) / self.sigma) / self.sigma
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x == f64::NEG_INFINITY {
            return 0.0;
        }
        if x == f64::INFINITY {
            return 1.0;
        }
        let w = (x - self.mu) / self.sigma;
        let integrand = |th: f64| {
            let c = th.cos();
            self.std_pdf(th.tan()) / (c * c)
        };
        let half_pi = std::f64::consts::FRAC_PI_2;
        let theta = w.atan();
        let p = if w <= 0.0 {
            integrate(integrand, -half_pi, theta, QUAD_TOL)
        } else {
            1.0 - integrate(integrand, theta, half_pi, QUAD_TOL)
        };
        p.clamp(0.0, 1.0)
    }

    /// Inverse CDF by bracketed root finding. ±∞ at p ∈ {0, 1}.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        let mut lo = self.mu - self.sigma;
        let mut hi = self.mu + self.sigma;
        let mut step = self.sigma;
        while self.cdf(lo) > p {
            step *= 2.0;
            lo -= step;
        }
        step = self.sigma;
        while self.cdf(hi) < p {
            step *= 2.0;
            hi += step;
        }
        brent(|x| self.cdf(x) - p, lo, hi, ROOT_TOL * self.sigma).unwrap_or(f64::NAN)
    }

    /// Skew-normal over √(χ²_ν/ν).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let delta = self.alpha / (1.0 + self.alpha * self.alpha).sqrt();
        let u0 = standard_normal(rng);
        let u1 = standard_normal(rng);
        let z = delta * u0.abs() + (1.0 - delta * delta).sqrt() * u1;
        let w = sample_gamma(rng, 0.5 * self.df, 0.5 * self.df).expect("df checked positive");
        self.mu + self.sigma * z / w.sqrt()
    }
}

pub fn skew_t_cdf(x: f64, df: f64, mu: f64, sigma: f64, alpha: f64) -> Result<f64> {
    Ok(SkewT::new(df, mu, sigma, alpha)?.cdf(x))
}

pub fn skew_t_quantile(p: f64, df: f64, mu: f64, sigma: f64, alpha: f64) -> Result<f64> {
    Ok(SkewT::new(df, mu, sigma, alpha)?.quantile(p))
}

pub fn sample_skew_t<R: Rng + ?Sized>(rng: &mut R, df: f64, mu: f64, sigma: f64, alpha: f64) -> Result<f64> {
    Ok(SkewT::new(df, mu, sigma, alpha)?.sample(rng))
}
