mod common;

use common::{batch_mean_se, ks_distance, mean_se};
use dgfc::dgp::*;
use dgfc::linalg::{Matrix, Vector};
use dgfc::random::RngStream;
use std::f64::consts::PI;

fn m(r: usize, c: usize, v: &[f64]) -> Matrix {
    Matrix::from_row_slice(r, c, v)
}

fn moderate_varma() -> VarmaSpec {
    VarmaSpec {
        b0: Vector::from_column_slice(&[1.0, -0.5]),
        ar: vec![m(2, 2, &[0.5, 0.1, -0.2, 0.3]), m(2, 2, &[0.1, 0.0, 0.05, -0.1])],
        ma: vec![m(2, 2, &[0.4, -0.3, 0.2, 0.6])],
        sigma: m(2, 2, &[1.0, 0.3, 0.3, 0.5]),
    }
}

fn kendall_tau(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += ((a[i] - a[j]) * (b[i] - b[j])).signum();
        }
    }
    s / (n * (n - 1) / 2) as f64
}

#[test]
fn long_path_varma_moments() {
    let spec = moderate_varma();
    let (mean, cov) = varma_stationary_moments(&spec).unwrap();
    let y = simulate_varma(&mut RngStream::new(1, 0).rng(), &spec, 1_000_000, DEFAULT_BURN).unwrap();
    for i in 0..2 {
        let col: Vec<f64> = y.column(i).iter().copied().collect();
        let (mu, se) = batch_mean_se(&col, 50);
        assert!((mu - mean[i]).abs() < 3.0 * se, "mean {i}: {mu} vs {}", mean[i]);
    }
    for (i, j) in [(0, 0), (0, 1), (1, 1)] {
        let prod: Vec<f64> = (0..y.nrows()).map(|t| (y[(t, i)] - mean[i]) * (y[(t, j)] - mean[j])).collect();
        let (c, se) = batch_mean_se(&prod, 50);
        assert!((c - cov[(i, j)]).abs() < 3.0 * se, "cov ({i},{j}): {c} vs {}", cov[(i, j)]);
    }
}

#[test]
fn scalar_arma_closed_form() {
    let (b, c, s2) = (0.6, -0.4, 1.7);
    let spec = VarmaSpec {
        b0: Vector::from_element(1, 2.0),
        ar: vec![Matrix::from_element(1, 1, b)],
        ma: vec![Matrix::from_element(1, 1, c)],
        sigma: Matrix::from_element(1, 1, s2),
    };
    let (mean, cov) = varma_stationary_moments(&spec).unwrap();
    assert!((mean[0] - 2.0 / (1.0 - b)).abs() < 1e-12);
    assert!((cov[(0, 0)] - s2 * (1.0 + 2.0 * b * c + c * c) / (1.0 - b * b)).abs() < 1e-10);
}

#[test]
fn random_specs() {
    let mut rng = RngStream::new(2, 0).rng();
    let trivial = random_varma_params(&mut rng, 2, 0, 0).unwrap();
    assert!(trivial.ar.is_empty() && trivial.ma.is_empty() && trivial.is_stationary());
    for _ in 0..50 {
        let spec = random_varma_params(&mut rng, 2, 3, 6).unwrap();
        assert!(dgfc::linalg::spectral_radius(&spec.ar_companion()) < 1.0);
        assert_eq!((spec.ar.len(), spec.ma.len()), (3, 6));
    }
    let varch = random_varch_params(&mut rng, 2).unwrap();
    assert!(varch.nu > 4.0);
}

#[test]
fn innovation_covariance_law() {
    // Σ ~ IW(3, I₂) gives 1/Σ₁₁ ~ χ²₂, so P(Σ₁₁ ≤ x) = exp(−1/(2x))
    let base = RngStream::new(3, 0);
    let mut s11: Vec<f64> = (0..20_000)
        .map(|r| random_varma_params(&mut base.substream(r).rng(), 2, 1, 0).unwrap().sigma[(0, 0)])
        .collect();
    s11.sort_by(f64::total_cmp);
    let d = ks_distance(&s11, |x| if x > 0.0 { (-0.5 / x).exp() } else { 0.0 });
    assert!(d < 1.95 / (20_000f64).sqrt(), "{d}");
}

#[test]
fn varch_stationary_margin() {
    let spec = VarchSpec::new(9.0, m(2, 2, &[1.0, 0.4, 0.4, 2.0])).unwrap();
    let y = simulate_varch(&mut RngStream::new(4, 0).rng(), &spec, 400_000, DEFAULT_BURN).unwrap();
    for (i, j) in [(0, 0), (0, 1), (1, 1)] {
        let prod: Vec<f64> = (0..y.nrows()).map(|t| y[(t, i)] * y[(t, j)]).collect();
        let (c, se) = batch_mean_se(&prod, 40);
        let truth = spec.a[(i, j)] / (spec.nu - 3.0);
        assert!((c - truth).abs() < 4.0 * se, "({i},{j}): {c} vs {truth}");
    }
    let head: Vec<f64> = y.column(1).iter().take(100_000).copied().collect();
    let mut sorted = head.clone();
    sorted.sort_by(f64::total_cmp);
    assert!(ks_distance(&sorted, |x| varch_margin_cdf(&spec, 1, x)) < 0.01);
    let sd = (spec.a[(1, 1)] / (spec.nu - 3.0)).sqrt();
    let cubes: Vec<f64> = y.column(1).iter().map(|v| (v / sd).powi(3)).collect();
    let (skew, se) = batch_mean_se(&cubes, 40);
    assert!(skew.abs() < 4.0 * se, "{skew} ± {se}");
}

#[test]
fn copula_poisson_margin() {
    let mut rng = RngStream::new(5, 0).rng();
    let mut spec = VarmaCopulaSpec::random(&mut rng).unwrap();
    // the second column is irrelevant here and its numerical quantile is slow
    spec.margins[1] = Margin::Normal { mean: 0.0, sd: 1.0 };
    let y = simulate_varma_copula(&mut rng, &spec, 200_000, DEFAULT_BURN).unwrap();
    let hits: Vec<f64> = y.column(0).iter().map(|&v| (v == 5.0) as u8 as f64).collect();
    let (p, se) = batch_mean_se(&hits, 40);
    let pmf = (-5f64).exp() * 5f64.powi(5) / 120.0;
    assert!((pmf - 0.175_467_369_767_850_6).abs() < 1e-15);
    assert!((p - pmf).abs() < 4.0 * se, "{p} vs {pmf}");
    assert!(y.column(0).iter().all(|&v| v >= 0.0 && v.fract() == 0.0));
    assert!((true_margin_cdf(&spec, 0, 5.0) - poisson_cdf(5.0, 5.0)).abs() < 1e-15);
}

#[test]
fn copula_kendall_identity() {
    let mut rng = RngStream::new(6, 0).rng();
    let mut spec = VarmaCopulaSpec::random(&mut rng).unwrap();
    spec.margins = vec![Margin::Gamma { shape: 2.0, rate: 1.0 }, Margin::skew_t_default()];
    let (_, cov) = varma_stationary_moments(&spec.latent).unwrap();
    let rho = cov[(0, 1)] / (cov[(0, 0)] * cov[(1, 1)]).sqrt();
    let oracle = 2.0 / PI * rho.asin();
    let taus: Vec<f64> = (0..20)
        .map(|_| {
            let y = simulate_varma_copula(&mut rng, &spec, 2000, DEFAULT_BURN).unwrap();
            let a: Vec<f64> = y.column(0).iter().copied().collect();
            let b: Vec<f64> = y.column(1).iter().copied().collect();
            kendall_tau(&a, &b)
        })
        .collect();
    let (tau, se) = mean_se(&taus);
    assert!((tau - oracle).abs() < 4.0 * se, "{tau} vs {oracle} (se {se})");
}

#[test]
fn noise_free_copula_is_constant() {
    let spec = VarmaCopulaSpec {
        latent: VarmaSpec {
            b0: Vector::from_element(2, 0.3),
            ar: vec![Matrix::identity(2, 2) * 0.5],
            ma: vec![],
            sigma: Matrix::zeros(2, 2),
        },
        margins: vec![Margin::Poisson { lambda: 5.0 }, Margin::skew_t_default()],
    };
    let y = simulate_varma_copula(&mut RngStream::new(7, 0).rng(), &spec, 50, 10).unwrap();
    for i in 0..2 {
        assert!(y.column(i).iter().all(|&v| v == y[(0, i)]));
    }
    assert_eq!(y[(0, 0)], 5.0);
}

#[test]
fn copula_is_invariant_to_latent_scale() {
    let spec = VarmaCopulaSpec::random(&mut RngStream::new(8, 0).rng()).unwrap();
    let mut scaled = spec.clone();
    scaled.latent.b0 *= 3.0;
    scaled.latent.sigma *= 9.0;
    let a = simulate_varma_copula(&mut RngStream::new(9, 0).rng(), &spec, 5000, DEFAULT_BURN).unwrap();
    let b = simulate_varma_copula(&mut RngStream::new(9, 0).rng(), &scaled, 5000, DEFAULT_BURN).unwrap();
    let count_agree = (0..5000).filter(|&t| a[(t, 0)] == b[(t, 0)]).count();
    assert!(count_agree >= 4995);
    assert!((0..5000).all(|t| (a[(t, 1)] - b[(t, 1)]).abs() < 1e-6 * (1.0 + a[(t, 1)].abs())));
}

#[test]
fn burn_in_doubling_barely_moves_moments() {
    let spec = moderate_varma();
    let a = simulate_varma(&mut RngStream::new(10, 0).rng(), &spec, 100_000, DEFAULT_BURN).unwrap();
    let b = simulate_varma(&mut RngStream::new(10, 0).rng(), &spec, 100_000, 2 * DEFAULT_BURN).unwrap();
    let varch = VarchSpec::new(9.0, Matrix::identity(2, 2)).unwrap();
    let c = simulate_varch(&mut RngStream::new(10, 0).rng(), &varch, 100_000, DEFAULT_BURN).unwrap();
    let d = simulate_varch(&mut RngStream::new(10, 0).rng(), &varch, 100_000, 2 * DEFAULT_BURN).unwrap();
    for (x, y) in [(&a, &b), (&c, &d)] {
        for i in 0..2 {
            let xs: Vec<f64> = x.column(i).iter().copied().collect();
            let ys: Vec<f64> = y.column(i).iter().copied().collect();
            let (mx, se) = batch_mean_se(&xs, 50);
            let (my, _) = batch_mean_se(&ys, 50);
            assert!((mx - my).abs() < se);
            let sq = |v: &[f64]| v.iter().map(|z| z * z).collect::<Vec<_>>();
            let (vx, se2) = batch_mean_se(&sq(&xs), 50);
            let (vy, _) = batch_mean_se(&sq(&ys), 50);
            assert!((vx - vy).abs() < se2);
        }
    }
}

#[test]
fn simulators_are_seed_deterministic() {
    for kind in [DgpKind::Varma, DgpKind::Varch, DgpKind::VarmaCopula] {
        let run = |seed| {
            let mut rng = RngStream::new(seed, 0).rng();
            Dgp::random(&mut rng, kind).unwrap().simulate(&mut rng, 100, DEFAULT_BURN).unwrap()
        };
        assert_eq!(run(11), run(11));
        assert_ne!(run(11).values(), run(12).values());
    }
    let run = |seed| {
        let mut rng = RngStream::new(seed, 0).rng();
        let spec = random_var_copula_spec(&mut rng).unwrap();
        simulate_dgfc(&mut rng, &spec, 60).unwrap()
    };
    assert_eq!(run(13), run(13));
}

#[test]
fn var_copula_truth_is_stable_with_expected_margins() {
    let mut rng = RngStream::new(14, 0).rng();
    for _ in 0..20 {
        let spec = random_var_copula_spec(&mut rng).unwrap();
        assert!(dgfc::stationary::is_stable(&spec.params.g));
        assert!(matches!(spec.margins[0], Margin::Gamma { shape, rate } if shape == 1.0 && rate == 1.0));
        let (y, z) = simulate_dgfc(&mut rng, &spec, 30).unwrap();
        assert!(y.column(0).iter().all(|&v| v > 0.0));
        assert_eq!(z.shape(), (30, 2));
    }
}
