//! Synthetic data-generating processes with known stationary margins.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Gamma, StudentsT};

use crate::error::{DgfcError, Result};
use crate::linalg::{chol_lower, psd_factor, solve_discrete_lyapunov, Matrix, Vector};
use crate::random::{
    norm_cdf, norm_quantile, sample_gamma, sample_inverse_wishart, sample_mvn_chol,
    standard_normal, standard_normal_vector, SkewT,
};
use crate::stationary::{
    identified_params, implied_functionals, is_stable, stationary_autocovariance, DataKind,
    DgfcParams, TimeSeriesPanel,
};

pub const DEFAULT_BURN: usize = 500;
const GENERATION_CAP: usize = 1000;

/// A univariate marginal distribution with CDF and quantile function.
#[derive(Debug, Clone)]
pub enum Margin {
    Normal { mean: f64, sd: f64 },
    StudentT { df: f64, scale: f64 },
    Poisson { lambda: f64 },
    SkewT(SkewT),
    Gamma { shape: f64, rate: f64 },
}

impl Margin {
    /// Skew-t(3, 0, 1, 2).
    pub fn skew_t_default() -> Self {
        Margin::SkewT(SkewT::new(3.0, 0.0, 1.0, 2.0).expect("valid constants"))
    }

    pub fn kind(&self) -> DataKind {
        match self {
            Margin::Poisson { .. } => DataKind::Count,
            _ => DataKind::Continuous,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Margin::Normal { mean, sd } => norm_cdf((x - mean) / sd),
            Margin::StudentT { df, scale } => StudentsT::new(0.0, *scale, *df)
                .map(|d| d.cdf(x))
                .unwrap_or(f64::NAN),
            Margin::Poisson { lambda } => poisson_cdf(*lambda, x),
            Margin::SkewT(st) => st.cdf(x),
            Margin::Gamma { shape, rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    Gamma::new(*shape, *rate).map(|d| d.cdf(x)).unwrap_or(f64::NAN)
                }
            }
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Margin::Normal { mean, sd } => mean + sd * norm_quantile(u),
            Margin::StudentT { df, scale } => StudentsT::new(0.0, *scale, *df)
                .map(|d| d.inverse_cdf(u))
                .unwrap_or(f64::NAN),
            Margin::Poisson { lambda } => poisson_quantile(*lambda, u),
            Margin::SkewT(st) => st.quantile(u),
            Margin::Gamma { shape, rate } => {
                if *shape == 1.0 {
                    -(-u).ln_1p() / rate
                } else {
                    Gamma::new(*shape, *rate)
                        .map(|d| d.inverse_cdf(u))
                        .unwrap_or(f64::NAN)
                }
            }
        }
    }
}

pub fn poisson_cdf(lambda: f64, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let kmax = x.floor() as u64;
    let mut term = (-lambda).exp();
    let mut sum = term;
    for j in 1..=kmax {
        term *= lambda / j as f64;
        sum += term;
        if term < 1e-300 {
            break;
        }
    }
    sum.min(1.0)
}

/// Smallest integer j with P(X ≤ j) ≥ u, by direct summation.
pub fn poisson_quantile(lambda: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let mut term = (-lambda).exp();
    let mut sum = term;
    let mut j = 0u64;
    while sum < u && j < 100_000 {
        j += 1;
        term *= lambda / j as f64;
        sum += term;
        if term == 0.0 && j as f64 > lambda {
            break;
        }
    }
    j as f64
}

/// y_t = b0 + Σ B_l y_{t−l} + ε_t + Σ C_j ε_{t−j}, ε_t ~ N(0, Σ).
#[derive(Debug, Clone, PartialEq)]
pub struct VarmaSpec {
    pub b0: Vector,
    pub ar: Vec<Matrix>,
    pub ma: Vec<Matrix>,
    pub sigma: Matrix,
}

impl VarmaSpec {
    pub fn n(&self) -> usize {
        self.b0.len()
    }

    /// np×np companion matrix of the autoregressive part.
    pub fn ar_companion(&self) -> Matrix {
        let n = self.n();
        let p = self.ar.len();
        let mut a = Matrix::zeros(n * p, n * p);
        for (l, b) in self.ar.iter().enumerate() {
            a.view_mut((0, n * l), (n, n)).copy_from(b);
        }
        for l in 1..p {
            a.view_mut((n * l, n * (l - 1)), (n, n)).copy_from(&Matrix::identity(n, n));
        }
        a
    }

    pub fn is_stationary(&self) -> bool {
        self.ar.is_empty() || is_stable(&self.ar_companion())
    }

    pub fn mean(&self) -> Result<Vector> {
        let n = self.n();
        let mut m = Matrix::identity(n, n);
        for b in &self.ar {
            m -= b;
        }
        m.lu()
            .solve(&self.b0)
            .ok_or_else(|| DgfcError::Numeric("I − ΣB is singular".into()))
    }
}

/// Σ ~ IW(n+1, I), C entries N(0, 1), b0 ~ N(0, I), B entries N(0, 0.1)
/// (variance), with B redrawn until the AR part is stationary.
pub fn random_varma_params<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize, q: usize) -> Result<VarmaSpec> {
    let sigma = sample_inverse_wishart(rng, n as f64 + 1.0, &Matrix::identity(n, n))?;
    let ma = (0..q)
        .map(|_| Matrix::from_fn(n, n, |_, _| standard_normal(rng)))
        .collect();
    let b0 = standard_normal_vector(rng, n);
    let sd = 0.1f64.sqrt();
    for _ in 0..GENERATION_CAP {
        let ar: Vec<Matrix> = (0..p)
            .map(|_| Matrix::from_fn(n, n, |_, _| sd * standard_normal(rng)))
            .collect();
        let spec = VarmaSpec {
            b0: b0.clone(),
            ar,
            ma: Vec::clone(&ma),
            sigma: sigma.clone(),
        };
        if spec.is_stationary() {
            return Ok(spec);
        }
    }
    Err(DgfcError::Sampler {
        iteration: GENERATION_CAP,
        message: "no stationary VARMA autoregression found".into(),
    })
}

/// Exact stationary mean and covariance from the state vector
/// (y_t − μ, …, y_{t−p+1} − μ, ε_t, …, ε_{t−q+1}).
pub fn varma_stationary_moments(spec: &VarmaSpec) -> Result<(Vector, Matrix)> {
    if !spec.is_stationary() {
        return Err(DgfcError::Unstable {
            radius: crate::linalg::spectral_radius(&spec.ar_companion()),
        });
    }
    let n = spec.n();
    let (p, q) = (spec.ar.len(), spec.ma.len());
    let mean = spec.mean()?;
    if p + q == 0 {
        return Ok((mean, spec.sigma.clone()));
    }
    let dim = n * (p + q);
    let mut a = Matrix::zeros(dim, dim);
    let mut r = Matrix::zeros(dim, n);
    for (l, b) in spec.ar.iter().enumerate() {
        a.view_mut((0, n * l), (n, n)).copy_from(b);
    }
    for (j, c) in spec.ma.iter().enumerate() {
        a.view_mut((0, n * (p + j)), (n, n)).copy_from(c);
    }
    for l in 1..p {
        a.view_mut((n * l, n * (l - 1)), (n, n)).copy_from(&Matrix::identity(n, n));
    }
    for j in 1..q {
        a.view_mut((n * (p + j), n * (p + j - 1)), (n, n)).copy_from(&Matrix::identity(n, n));
    }
    r.view_mut((0, 0), (n, n)).copy_from(&Matrix::identity(n, n));
    if q > 0 {
        r.view_mut((n * p, 0), (n, n)).copy_from(&Matrix::identity(n, n));
    }
    let state_cov = solve_discrete_lyapunov(&a, &(&r * &spec.sigma * r.transpose()))?;
    Ok((mean, state_cov.view((0, 0), (n, n)).into_owned()))
}

/// T×n path after discarding `burn` steps started at the mean.
pub fn simulate_varma<R: Rng + ?Sized>(rng: &mut R, spec: &VarmaSpec, t_len: usize, burn: usize) -> Result<Matrix> {
    if !spec.is_stationary() {
        return Err(DgfcError::Unstable {
            radius: crate::linalg::spectral_radius(&spec.ar_companion()),
        });
    }
    let n = spec.n();
    let mean = spec.mean()?;
    let l = psd_factor(&spec.sigma);
    let (p, q) = (spec.ar.len(), spec.ma.len());
    let mut ylags: Vec<Vector> = vec![mean.clone(); p];
    let mut elags: Vec<Vector> = vec![Vector::zeros(n); q];
    let mut out = Matrix::zeros(t_len, n);
    for step in 0..burn + t_len {
        let eps = &l * standard_normal_vector(rng, n);
        let mut y = spec.b0.clone() + &eps;
        for (b, yl) in spec.ar.iter().zip(&ylags) {
            y += b * yl;
        }
        for (c, el) in spec.ma.iter().zip(&elags) {
            y += c * el;
        }
        if p > 0 {
            ylags.rotate_right(1);
            ylags[0] = y.clone();
        }
        if q > 0 {
            elags.rotate_right(1);
            elags[0] = eps;
        }
        if step >= burn {
            out.set_row(step - burn, &y.transpose());
        }
    }
    Ok(out)
}

/// y_t | y_{t−1} ~ t_n(ν, 0, (A + y_{t−1}y_{t−1}ᵀ)/ν).
#[derive(Debug, Clone, PartialEq)]
pub struct VarchSpec {
    pub nu: f64,
    pub a: Matrix,
}

impl VarchSpec {
    pub fn new(nu: f64, a: Matrix) -> Result<Self> {
        let n = a.nrows() as f64;
        if !(nu > n + 2.0) {
            return Err(DgfcError::Validation(format!("VARCH needs nu > n + 2, got {nu}")));
        }
        chol_lower(&a, "VARCH scale")?;
        Ok(Self { nu, a })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }
}

/// ν − n − 2 ~ Gamma(1, 1) and A ~ IW(n+1, I).
pub fn random_varch_params<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<VarchSpec> {
    let nu = n as f64 + 2.0 + sample_gamma(rng, 1.0, 1.0)?;
    let a = sample_inverse_wishart(rng, n as f64 + 1.0, &Matrix::identity(n, n))?;
    VarchSpec::new(nu, a)
}

pub fn simulate_varch<R: Rng + ?Sized>(rng: &mut R, spec: &VarchSpec, t_len: usize, burn: usize) -> Result<Matrix> {
    let n = spec.n();
    let mut y = Vector::zeros(n);
    let mut out = Matrix::zeros(t_len, n);
    for step in 0..burn + t_len {
        let scale = (&spec.a + &y * y.transpose()) / spec.nu;
        let l = chol_lower(&scale, "VARCH conditional scale")?;
        let w = sample_gamma(rng, 0.5 * spec.nu, 0.5 * spec.nu)?;
        y = sample_mvn_chol(rng, &Vector::zeros(n), &l) / w.sqrt();
        if step >= burn {
            out.set_row(step - burn, &y.transpose());
        }
    }
    Ok(out)
}

/// Stationary margin of coordinate i: t with ν − 1 degrees of freedom and
/// scale √(A_ii/(ν − 1)).
pub fn varch_margin(spec: &VarchSpec, i: usize) -> Margin {
    Margin::StudentT {
        df: spec.nu - 1.0,
        scale: (spec.a[(i, i)] / (spec.nu - 1.0)).sqrt(),
    }
}

pub fn varch_margin_cdf(spec: &VarchSpec, i: usize, x: f64) -> f64 {
    varch_margin(spec, i).cdf(x)
}

/// Latent VARMA standardized by its exact stationary moments, pushed
/// through y_i = F_i⁻¹(Φ(z_i)).
#[derive(Debug, Clone)]
pub struct VarmaCopulaSpec {
    pub latent: VarmaSpec,
    pub margins: Vec<Margin>,
}

impl VarmaCopulaSpec {
    /// Poisson(5) and skew-t(3, 0, 1, 2) margins on a random VARMA(1, 1).
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Result<Self> {
        Ok(Self {
            latent: random_varma_params(rng, 2, 1, 1)?,
            margins: vec![Margin::Poisson { lambda: 5.0 }, Margin::skew_t_default()],
        })
    }
}

fn push_through_margins(z: &Matrix, margins: &[Margin]) -> Matrix {
    let mut y = z.clone();
    for (i, m) in margins.iter().enumerate() {
        for t in 0..z.nrows() {
            y[(t, i)] = m.quantile(norm_cdf(z[(t, i)]));
        }
    }
    y
}

pub fn simulate_varma_copula<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &VarmaCopulaSpec,
    t_len: usize,
    burn: usize,
) -> Result<Matrix> {
    let x = simulate_varma(rng, &spec.latent, t_len, burn)?;
    let (mean, cov) = varma_stationary_moments(&spec.latent)?;
    let mut z = x;
    for i in 0..z.ncols() {
        let sd = cov[(i, i)].sqrt();
        for t in 0..z.nrows() {
            z[(t, i)] = if sd > 0.0 { (z[(t, i)] - mean[i]) / sd } else { 0.0 };
        }
    }
    Ok(push_through_margins(&z, &spec.margins))
}

pub fn true_margin_cdf(spec: &VarmaCopulaSpec, i: usize, x: f64) -> f64 {
    spec.margins[i].cdf(x)
}

/// Gaussian copula driven by the dynamic factor model itself.
#[derive(Debug, Clone)]
pub struct DgfcSpec {
    pub params: DgfcParams,
    pub margins: Vec<Margin>,
}

impl DgfcSpec {
    /// Plain VAR(1) copula with Λ = I and V = 0.
    pub fn var_copula(g: Matrix, sigma: Matrix, margins: Vec<Margin>) -> Self {
        Self {
            params: DgfcParams::var_copula(g, sigma),
            margins,
        }
    }

    /// Identified (G̃, Σ̃) of the latent process.
    pub fn identified_truth(&self) -> Result<(Matrix, Matrix)> {
        identified_params(&self.params)
    }
}

/// Ground truth of the VAR-copula concentration study: vec(G) ~ N(0, 0.1 I)
/// redrawn until stable, Σ ~ IW(n+1, I), margins Gamma(1, 1) and
/// skew-t(3, 0, 1, 2).
pub fn random_var_copula_spec<R: Rng + ?Sized>(rng: &mut R) -> Result<DgfcSpec> {
    let n = 2;
    let sigma = sample_inverse_wishart(rng, n as f64 + 1.0, &Matrix::identity(n, n))?;
    let sd = 0.1f64.sqrt();
    for _ in 0..GENERATION_CAP {
        let g = Matrix::from_fn(n, n, |_, _| sd * standard_normal(rng));
        if is_stable(&g) {
            return Ok(DgfcSpec::var_copula(
                g,
                sigma,
                vec![Margin::Gamma { shape: 1.0, rate: 1.0 }, Margin::skew_t_default()],
            ));
        }
    }
    Err(DgfcError::Sampler {
        iteration: GENERATION_CAP,
        message: "no stable transition found".into(),
    })
}

/// Stationary start η₁ ~ N(0, Γ0), then the factor VAR, x = Λη + e,
/// z = D0^{−1/2} x and y = F⁻¹(Φ(z)). Returns (y, z).
pub fn simulate_dgfc<R: Rng + ?Sized>(rng: &mut R, spec: &DgfcSpec, t_len: usize) -> Result<(Matrix, Matrix)> {
    let p = &spec.params;
    let (n, k) = (p.n(), p.k());
    let gamma0 = stationary_autocovariance(&p.g, &p.sigma, 0)?;
    let d0 = implied_functionals(p)?.d0;
    let l0 = psd_factor(&gamma0);
    let ls = psd_factor(&p.sigma);
    let mut eta = &l0 * standard_normal_vector(rng, k);
    let mut z = Matrix::zeros(t_len, n);
    for t in 0..t_len {
        if t > 0 {
            eta = &p.g * &eta + &ls * standard_normal_vector(rng, k);
        }
        let mean = &p.lambda * &eta;
        for i in 0..n {
            let x = mean[i] + p.v[i].sqrt() * standard_normal(rng);
            z[(t, i)] = x / d0[i].sqrt();
        }
    }
    Ok((push_through_margins(&z, &spec.margins), z))
}

/// Wraps a simulated matrix as a panel, tagging count margins.
pub fn to_panel(values: Matrix, margins: &[Margin]) -> Result<TimeSeriesPanel> {
    let names = (0..values.ncols()).map(|i| format!("y{}", i + 1)).collect();
    let kinds = margins.iter().map(Margin::kind).collect();
    TimeSeriesPanel::new(values, names, kinds)
}

/// The three margin-recovery processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DgpKind {
    Varma,
    Varch,
    VarmaCopula,
}

impl DgpKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DgpKind::Varma => "varma",
            DgpKind::Varch => "varch",
            DgpKind::VarmaCopula => "varma_copula",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "varma" => Some(DgpKind::Varma),
            "varch" => Some(DgpKind::Varch),
            "varma_copula" => Some(DgpKind::VarmaCopula),
            _ => None,
        }
    }
}

/// A drawn process together with its exact margins.
#[derive(Debug, Clone)]
pub enum Dgp {
    Varma(VarmaSpec),
    Varch(VarchSpec),
    VarmaCopula(VarmaCopulaSpec),
    Dgfc(DgfcSpec),
}

impl Dgp {
    /// Draws parameters: VARMA (n, p, q) = (2, 3, 6), VARCH with n = 2, or
    /// the VARMA(1, 1) copula.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, kind: DgpKind) -> Result<Self> {
        Ok(match kind {
            DgpKind::Varma => Dgp::Varma(random_varma_params(rng, 2, 3, 6)?),
            DgpKind::Varch => Dgp::Varch(random_varch_params(rng, 2)?),
            DgpKind::VarmaCopula => Dgp::VarmaCopula(VarmaCopulaSpec::random(rng)?),
        })
    }

    pub fn margins(&self) -> Result<Vec<Margin>> {
        Ok(match self {
            Dgp::Varma(spec) => {
                let (mean, cov) = varma_stationary_moments(spec)?;
                (0..spec.n())
                    .map(|i| Margin::Normal {
                        mean: mean[i],
                        sd: cov[(i, i)].sqrt(),
                    })
                    .collect()
            }
            Dgp::Varch(spec) => (0..spec.n()).map(|i| varch_margin(spec, i)).collect(),
            Dgp::VarmaCopula(spec) => spec.margins.clone(),
            Dgp::Dgfc(spec) => spec.margins.clone(),
        })
    }

    pub fn simulate<R: Rng + ?Sized>(&self, rng: &mut R, t_len: usize, burn: usize) -> Result<TimeSeriesPanel> {
        let values = match self {
            Dgp::Varma(spec) => simulate_varma(rng, spec, t_len, burn)?,
            Dgp::Varch(spec) => simulate_varch(rng, spec, t_len, burn)?,
            Dgp::VarmaCopula(spec) => simulate_varma_copula(rng, spec, t_len, burn)?,
            Dgp::Dgfc(spec) => simulate_dgfc(rng, spec, t_len)?.0,
        };
        to_panel(values, &self.margins()?)
    }
}
