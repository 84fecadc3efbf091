//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Schur};

use crate::error::{DgfcError, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Largest eigenvalue modulus of a square matrix.
pub fn spectral_radius(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    if m.nrows() == 1 {
        return m[(0, 0)].abs();
    }
    // unbounded QR iterations can cycle on some inputs; cap them and retry on the transpose
    for a in [m.clone(), m.transpose()] {
        if let Some(schur) = Schur::try_new(a, f64::EPSILON, 10_000) {
            return schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        }
    }
    gelfand_radius(m)
}

/// ρ(A) = lim ‖A^(2^j)‖^(2^−j), squaring with renormalization.
fn gelfand_radius(m: &Matrix) -> f64 {
    let norm = m.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let mut b = m / norm;
    let mut log_scale = norm.ln();
    let mut est = norm;
    for j in 1..=60 {
        b = &b * &b;
        let s = b.norm();
        if s == 0.0 {
            return 0.0;
        }
        b /= s;
        log_scale = 2.0 * log_scale + s.ln();
        est = (log_scale / 2f64.powi(j)).exp();
    }
    est
}

/// (A + Aᵀ)/2
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub fn cholesky(m: &Matrix, what: &str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone())
        .ok_or_else(|| DgfcError::Numeric(format!("{what} is not positive definite")))
}

/// Lower Cholesky factor.
pub fn chol_lower(m: &Matrix, what: &str) -> Result<Matrix> {
    Ok(cholesky(m, what)?.l())
}

/// A factor L with L Lᵀ = m for symmetric positive semidefinite m:
/// Cholesky when it succeeds, otherwise the eigenvalue square root with
/// negative eigenvalues clipped to zero.
pub fn psd_factor(m: &Matrix) -> Matrix {
    if let Some(c) = Cholesky::new(symmetrize(m)) {
        return c.l();
    }
    let eig = nalgebra::SymmetricEigen::new(symmetrize(m));
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * Matrix::from_diagonal(&roots)
}

pub fn is_spd(m: &Matrix) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let asym = (m - m.transpose()).amax();
    let scale = m.amax().max(1.0);
    asym <= 1e-9 * scale && Cholesky::new(symmetrize(m)).is_some()
}

pub fn inverse_spd(m: &Matrix, what: &str) -> Result<Matrix> {
    Ok(cholesky(m, what)?.inverse())
}

pub fn inverse(m: &Matrix, what: &str) -> Result<Matrix> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| DgfcError::Numeric(format!("{what} is singular")))
}

/// Column-stacking vec operator.
pub fn vec(m: &Matrix) -> Vector {
    Vector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &Vector, rows: usize, cols: usize) -> Matrix {
    Matrix::from_column_slice(rows, cols, v.as_slice())
}

/// Solves X = A X Aᵀ + Q through the Kronecker system
/// vec(X) = (I − A⊗A)⁻¹ vec(Q), then symmetrizes.
pub fn solve_discrete_lyapunov(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    let k = a.nrows();
    let kk = a.kronecker(a);
    let system = Matrix::identity(k * k, k * k) - kk;
    let rhs = vec(q);
    let sol = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| DgfcError::Numeric("singular Kronecker system in Lyapunov solve".into()))?;
    Ok(symmetrize(&unvec(&sol, k, k)))
}

/// Rescales a symmetric matrix to unit diagonal.
pub fn to_correlation(m: &Matrix) -> Result<Matrix> {
    let n = m.nrows();
    let mut out = m.clone();
    for i in 0..n {
        if m[(i, i)] <= 0.0 {
            return Err(DgfcError::Degenerate(format!(
                "non-positive variance {} at index {i}",
                m[(i, i)]
            )));
        }
    }
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = m[(i, j)] / (m[(i, i)] * m[(j, j)]).sqrt();
        }
        out[(i, i)] = 1.0;
    }
    Ok(out)
}

/// Projects a symmetric matrix into the correlation cone by clipping
/// eigenvalues at `floor` and renormalizing the diagonal.
pub fn clip_to_correlation(m: &Matrix, floor: f64) -> Matrix {
    let eig = symmetrize(m).symmetric_eigen();
    let clipped = eig.eigenvalues.map(|l| l.max(floor));
    let rebuilt = &eig.eigenvectors * Matrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    let rebuilt = symmetrize(&rebuilt);
    let n = rebuilt.nrows();
    let mut out = rebuilt.clone();
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = rebuilt[(i, j)] / (rebuilt[(i, i)] * rebuilt[(j, j)]).sqrt();
        }
        out[(i, i)] = 1.0;
    }
    out
}

/// Sample covariance (divisor N−1) of the rows of `data`.
pub fn sample_covariance(data: &Matrix) -> Matrix {
    let n = data.nrows() as f64;
    let mean = data.row_mean();
    let mut centered = data.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    centered.transpose() * &centered / (n - 1.0)
}
