use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{DgfcError, Result};
use crate::linalg::{chol_lower, inverse_spd, symmetrize, Matrix, Vector};

/// Gamma(shape, rate) with mean shape/rate.
pub fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, rate: f64) -> Result<f64> {
    if !(shape > 0.0 && rate > 0.0) || !shape.is_finite() || !rate.is_finite() {
        return Err(DgfcError::Contract(format!(
            "gamma needs positive finite shape and rate, got ({shape}, {rate})"
        )));
    }
    let g = Gamma::new(shape, 1.0 / rate)
        .map_err(|e| DgfcError::Numeric(format!("gamma({shape}, {rate}): {e}")))?;
    Ok(g.sample(rng))
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn standard_normal_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    Vector::from_iterator(n, (0..n).map(|_| standard_normal(rng)))
}

pub fn standard_normal_matrix<R: Rng + ?Sized>(rng: &mut R, r: usize, c: usize) -> Matrix {
    // column-major fill order
    Matrix::from_iterator(r, c, (0..r * c).map(|_| standard_normal(rng)))
}

/// N(mean, cov) through the lower Cholesky factor.
pub fn sample_multivariate_normal<R: Rng + ?Sized>(
    rng: &mut R,
    mean: &Vector,
    cov: &Matrix,
) -> Result<Vector> {
    let l = chol_lower(cov, "covariance")?;
    Ok(mean + l * standard_normal_vector(rng, mean.len()))
}

/// N(mean, L Lᵀ) with a precomputed lower factor.
pub fn sample_mvn_chol<R: Rng + ?Sized>(rng: &mut R, mean: &Vector, l: &Matrix) -> Vector {
    mean + l * standard_normal_vector(rng, mean.len())
}

/// Wishart(d, S) by the Bartlett decomposition.
pub fn sample_wishart<R: Rng + ?Sized>(rng: &mut R, d: f64, scale: &Matrix) -> Result<Matrix> {
    let k = scale.nrows();
    if d <= k as f64 - 1.0 {
        return Err(DgfcError::Contract(format!(
            "Wishart degrees of freedom {d} must exceed k - 1 = {}",
            k as f64 - 1.0
        )));
    }
    let l = chol_lower(scale, "Wishart scale")?;
    let mut a = Matrix::zeros(k, k);
    for i in 0..k {
        // χ²(d − i) = Gamma((d − i)/2, rate 1/2)
        let chi2 = sample_gamma(rng, 0.5 * (d - i as f64), 0.5)?;
        a[(i, i)] = chi2.sqrt();
        for j in 0..i {
            a[(i, j)] = standard_normal(rng);
        }
    }
    let la = l * a;
    Ok(symmetrize(&(&la * la.transpose())))
}

/// Inverse-Wishart(d, Ψ) with mean Ψ/(d − k − 1).
pub fn sample_inverse_wishart<R: Rng + ?Sized>(rng: &mut R, d: f64, psi: &Matrix) -> Result<Matrix> {
    let psi_inv = inverse_spd(psi, "inverse-Wishart scale")?;
    let w = sample_wishart(rng, d, &psi_inv)?;
    Ok(symmetrize(&inverse_spd(&w, "Wishart draw")?))
}

/// Matrix-normal-inverse-Wishart draw:
/// Σ ~ IW(d, Ψ) and Gᵀ | Σ ~ MN(Ḡᵀ, O⁻¹, Σ), i.e.
/// vec(Gᵀ) ~ N(vec(Ḡᵀ), Σ ⊗ O⁻¹). Returns (G, Σ).
pub fn sample_mniw<R: Rng + ?Sized>(
    rng: &mut R,
    d: f64,
    psi: &Matrix,
    gbar_t: &Matrix,
    o_inv: &Matrix,
) -> Result<(Matrix, Matrix)> {
    let sigma = sample_inverse_wishart(rng, d, psi)?;
    let l_sigma = chol_lower(&sigma, "Sigma draw")?;
    let l_o = chol_lower(o_inv, "O inverse")?;
    let (r, c) = gbar_t.shape();
    let z = standard_normal_matrix(rng, r, c);
    let g_t = gbar_t + l_o * z * l_sigma.transpose();
    Ok((g_t.transpose(), sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::RngStream;

    #[test]
    fn gamma_means() {
        let mut rng = RngStream::new(11, 0).rng();
        for &(shape, rate) in &[(1.0, 1.0), (2.0, 4.0), (0.3, 2.0)] {
            let n = 200_000;
            let xs: Vec<f64> = (0..n).map(|_| sample_gamma(&mut rng, shape, rate).unwrap()).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let se = (shape / (rate * rate) / n as f64).sqrt();
            assert!((mean - shape / rate).abs() < 4.0 * se, "{shape} {rate}: {mean}");
        }
        assert!(sample_gamma(&mut rng, 0.0, 1.0).is_err());
    }

    #[test]
    fn mvn_identity_covariance() {
        let mut rng = RngStream::new(12, 0).rng();
        let n = 100_000;
        let mean = Vector::zeros(3);
        let cov = Matrix::identity(3, 3);
        let data = Matrix::from_fn(n, 3, |_, _| 0.0);
        let mut data = data;
        for r in 0..n {
            let x = sample_multivariate_normal(&mut rng, &mean, &cov).unwrap();
            data.set_row(r, &x.transpose());
        }
        let s = crate::linalg::sample_covariance(&data);
        // se of a unit variance estimate ≈ sqrt(2/n), of a covariance ≈ sqrt(1/n)
        assert!((s - Matrix::identity(3, 3)).amax() < 4.0 * (2.0 / n as f64).sqrt());
        let bad = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(sample_multivariate_normal(&mut rng, &Vector::zeros(2), &bad).is_err());
    }

    #[test]
    fn mniw_degenerate_column_covariance() {
        let mut rng = RngStream::new(13, 0).rng();
        let gbar_t = Matrix::from_row_slice(2, 2, &[0.2, -0.1, 0.4, 0.3]);
        let o_inv = Matrix::identity(2, 2) * 1e-8;
        let psi = Matrix::identity(2, 2);
        let mut sum_sq: f64 = 0.0;
        let draws = 2000;
        for _ in 0..draws {
            let (g, _) = sample_mniw(&mut rng, 6.0, &psi, &gbar_t, &o_inv).unwrap();
            sum_sq += (g - gbar_t.transpose()).map(|x| x * x).sum();
        }
        assert!(sum_sq / (4.0 * draws as f64) < 1e-6);
    }
}
