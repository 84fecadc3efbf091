#![allow(dead_code)]

use dgfc::linalg::{Matrix, Vector};
use dgfc::random::{standard_normal, StateSpaceSpec};
use rand::Rng;

/// Random k×k matrix rescaled to the given spectral radius.
pub fn random_stable<R: Rng + ?Sized>(rng: &mut R, k: usize, radius: f64) -> Matrix {
    loop {
        let g = Matrix::from_fn(k, k, |_, _| standard_normal(rng));
        let r = dgfc::linalg::spectral_radius(&g);
        if r > 1e-3 {
            return g * (radius / r);
        }
    }
}

/// Random SPD matrix A Aᵀ + 0.5 I.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Matrix {
    let a = Matrix::from_fn(k, k, |_, _| standard_normal(rng));
    &a * a.transpose() + Matrix::identity(k, k) * 0.5
}

/// (mean, standard error) assuming independent samples.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// (mean, standard error) from non-overlapping batch means.
pub fn batch_mean_se(xs: &[f64], batches: usize) -> (f64, f64) {
    let size = xs.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    mean_se(&means)
}

/// sup_x |ECDF(x) − F(x)| for sorted samples.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (j, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - j as f64 / n).abs()).max(((j + 1) as f64 / n - f).abs());
    }
    d
}

/// Joint Gaussian of (η_{1:T}, x_{1:T}) assembled densely, then
/// conditioned on x. Returns the mean and covariance of vec(η) ordered
/// time-major (η_1, η_2, …).
pub fn dense_smoother_oracle(spec: &StateSpaceSpec, x: &Matrix) -> (Vector, Matrix) {
    let (t_len, n, k) = (x.nrows(), spec.n(), spec.k());
    // cov(η_s, η_t) = G^{s−t} Γ0 for s ≥ t
    let mut powers = vec![Matrix::identity(k, k)];
    for _ in 1..t_len {
        let next = &spec.g * powers.last().unwrap();
        powers.push(next);
    }
    let mut s_ee = Matrix::zeros(t_len * k, t_len * k);
    for s in 0..t_len {
        for t in 0..t_len {
            let block = if s >= t {
                &powers[s - t] * &spec.gamma0
            } else {
                &spec.gamma0 * powers[t - s].transpose()
            };
            s_ee.view_mut((s * k, t * k), (k, k)).copy_from(&block);
        }
    }
    let mut big_l = Matrix::zeros(t_len * n, t_len * k);
    for t in 0..t_len {
        big_l.view_mut((t * n, t * k), (n, k)).copy_from(&spec.lambda);
    }
    let mut s_xx = &big_l * &s_ee * big_l.transpose();
    for t in 0..t_len {
        for i in 0..n {
            s_xx[(t * n + i, t * n + i)] += spec.v[i];
        }
    }
    let s_ex = &s_ee * big_l.transpose();
    let xv = Vector::from_iterator(t_len * n, (0..t_len).flat_map(|t| (0..n).map(move |i| x[(t, i)])));
    let inv = s_xx.try_inverse().expect("joint covariance invertible");
    let mean = &s_ex * &inv * xv;
    let cov = &s_ee - &s_ex * &inv * s_ex.transpose();
    (mean, cov)
}
