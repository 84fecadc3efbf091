//! Rank-based (Kendall) estimator of the identified VAR(1) copula
//! parameters. Oracle-only: O(T²) in the series length.

use crate::error::{DgfcError, Result};
use crate::linalg::{clip_to_correlation, is_spd, Matrix};

use super::{identify_var_params, TimeSeriesPanel};

const CLIP_FLOOR: f64 = 1e-8;

/// Ranks (1-based, ties share the minimum rank) of one column.
fn ranks(col: &[f64]) -> Vec<u32> {
    let mut idx: Vec<usize> = (0..col.len()).collect();
    idx.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
    let mut out = vec![0u32; col.len()];
    let mut r = 0;
    for (pos, &i) in idx.iter().enumerate() {
        if pos == 0 || col[i] != col[idx[pos - 1]] {
            r = pos as u32 + 1;
        }
        out[i] = r;
    }
    out
}

/// Pairwise-sign Kendall matrix of the stacked blocks (u_t, u_{t+1}).
///
/// Returns the 2n×2n matrix 2/((T−1)(T−2)) Σ_{i<j} s_ij s_ijᵀ with
/// s_ij = sign([u_i − u_j; u_{i+1} − u_{j+1}]).
pub fn kendall_lag_matrix(panel: &TimeSeriesPanel) -> Result<Matrix> {
    let t = panel.len();
    let n = panel.n_series();
    if t < 3 {
        return Err(DgfcError::Validation(
            "rank-based estimator needs T >= 3".into(),
        ));
    }
    let rank_cols: Vec<Vec<u32>> = (0..n).map(|i| ranks(&panel.column(i))).collect();
    let blocks = t - 1;
    let dim = 2 * n;
    let mut acc = vec![0i64; dim * dim];
    let mut s = vec![0i64; dim];
    for a in 0..blocks {
        for b in (a + 1)..blocks {
            for i in 0..n {
                let col = &rank_cols[i];
                s[i] = (col[a] as i64 - col[b] as i64).signum();
                s[n + i] = (col[a + 1] as i64 - col[b + 1] as i64).signum();
            }
            for p in 0..dim {
                if s[p] == 0 {
                    continue;
                }
                for q in 0..dim {
                    acc[p * dim + q] += s[p] * s[q];
                }
            }
        }
    }
    let norm = 2.0 / ((t - 1) as f64 * (t - 2) as f64);
    Ok(Matrix::from_fn(dim, dim, |p, q| acc[p * dim + q] as f64 * norm))
}

/// Consistent rank-based estimate of (G̃, Σ̃): Ĉ = sin(π T̂ / 2) then the
/// lag-0/lag-1 blocks go through [`identify_var_params`].
pub fn rank_based_var_estimator(panel: &TimeSeriesPanel) -> Result<(Matrix, Matrix)> {
    let n = panel.n_series();
    let tau = kendall_lag_matrix(panel)?;
    let c = tau.map(|x| (std::f64::consts::FRAC_PI_2 * x).sin());
    let mut c0 = c.view((0, 0), (n, n)).into_owned();
    for i in 0..n {
        c0[(i, i)] = 1.0;
    }
    let c0 = (&c0 + c0.transpose()) * 0.5;
    let c1 = c.view((n, 0), (n, n)).into_owned();
    let c0 = if is_spd(&c0) {
        c0
    } else {
        log::warn!("rank-based lag-0 correlation is not PD; clipping eigenvalues");
        clip_to_correlation(&c0, CLIP_FLOOR)
    };
    identify_var_params(&c0, &c1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comonotone_pair_has_unit_kendall() {
        let y1 = [0.3, -1.2, 2.0, 0.1, 0.7, -0.4, 1.1];
        let vals: Vec<f64> = y1.iter().flat_map(|&a: &f64| [a, a.exp()]).collect();
        let panel = TimeSeriesPanel::continuous(Matrix::from_row_slice(7, 2, &vals)).unwrap();
        let k = kendall_lag_matrix(&panel).unwrap();
        assert_eq!(k[(0, 1)], 1.0);
        assert_eq!(k[(0, 0)], 1.0);
    }

    #[test]
    fn ties_share_rank() {
        assert_eq!(ranks(&[2.0, 1.0, 2.0, 3.0]), vec![2, 1, 2, 4]);
    }
}
