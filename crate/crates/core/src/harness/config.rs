//! Declarative run configuration read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{DgfcError, Result};
use crate::gibbs::{McmcConfig, ModelKind};
use crate::linalg::Matrix;
use crate::stationary::PriorHyper;

/// Prior overrides; anything left out keeps its default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    /// Factor count; ⌈0.7n⌉ for the factor model and n for the VAR copula.
    pub k: Option<usize>,
    pub d0: Option<f64>,
    /// Ψ0 = psi0_scale · I.
    pub psi0_scale: Option<f64>,
    /// O0 = o0_scale · I.
    pub o0_scale: Option<f64>,
    pub alpha0: Option<f64>,
    pub beta0: Option<f64>,
    pub nu0: Option<f64>,
    pub a0: Option<f64>,
    pub b0: Option<f64>,
}

impl PriorConfig {
    pub fn to_hyper(&self, n: usize, model: ModelKind) -> Result<PriorHyper> {
        let k = match (self.k, model) {
            (Some(k), ModelKind::VarCopula) if k != n => {
                return Err(DgfcError::Validation(format!("the VAR copula needs k = n = {n}, got {k}")));
            }
            (Some(k), _) => k,
            (None, ModelKind::VarCopula) => n,
            (None, ModelKind::Factor) => PriorHyper::default_k(n),
        };
        let mut p = PriorHyper::with_k(k);
        if let Some(v) = self.d0 {
            p.d0 = v;
        }
        if let Some(s) = self.psi0_scale {
            p.psi0 = Matrix::identity(k, k) * s;
        }
        if let Some(s) = self.o0_scale {
            p.o0 = Matrix::identity(k, k) * s;
        }
        for (dst, src) in [
            (&mut p.alpha0, self.alpha0),
            (&mut p.beta0, self.beta0),
            (&mut p.nu0, self.nu0),
            (&mut p.a0, self.a0),
            (&mut p.b0, self.b0),
        ] {
            if let Some(v) = src {
                *dst = v;
            }
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastSection {
    pub horizons: usize,
    pub seed: u64,
}

impl Default for ForecastSection {
    fn default() -> Self {
        Self { horizons: 10, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktestSection {
    pub t0: usize,
    pub horizons: usize,
    pub refit_stride: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BacktestSection {
    fn default() -> Self {
        Self {
            t0: 11,
            horizons: 10,
            refit_stride: 1,
            level: 0.95,
            seed: 0,
        }
    }
}

/// Everything a subcommand needs besides its file arguments.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    pub prior: PriorConfig,
    pub mcmc: McmcConfig,
    pub forecast: ForecastSection,
    pub backtest: BacktestSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| DgfcError::Validation(format!("config: {}", e.message())))?;
        cfg.mcmc.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Canonical text of the effective configuration, defaults filled in.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = RunConfig::from_toml("[mcmc]\ntotal = 200\nburn = 100\n[prior]\nnu0 = 4.0\n").unwrap();
        assert_eq!(cfg.mcmc.thin, 5);
        assert_eq!(cfg.mcmc.total, 200);
        let p = cfg.prior.to_hyper(4, ModelKind::Factor).unwrap();
        assert_eq!(p.k, 3);
        assert_eq!(p.nu0, 4.0);
        assert_eq!(p.b0, 3.0);
        assert_eq!(cfg.prior.to_hyper(2, ModelKind::VarCopula).unwrap().k, 2);
        let again = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(RunConfig::from_toml("[mcmc]\ntotl = 5\n").is_err());
        assert!(RunConfig::from_toml("[mcmc]\ntotal = 5\nburn = 5\n").is_err());
    }
}
