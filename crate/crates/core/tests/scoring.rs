use dgfc::forecast::ForecastDraws;
use dgfc::linalg::Matrix;
use dgfc::random::{standard_normal, RngStream};
use dgfc::scoring::*;
use dgfc::stationary::DataKind;
use proptest::prelude::*;

fn brute_hpd(draws: &[f64], level: f64) -> f64 {
    let mut s = draws.to_vec();
    s.sort_by(f64::total_cmp);
    let w = (level * s.len() as f64).ceil() as usize;
    (0..=s.len() - w).map(|i| s[i + w - 1] - s[i]).fold(f64::INFINITY, f64::min)
}

#[test]
fn crps_examples() {
    assert_eq!(crps_sample(&[0.0, 2.0], 1.0).unwrap(), 0.5);
    assert_eq!(crps_sample(&[1.5; 9], 1.5).unwrap(), 0.0);
    assert!(crps_sample(&[], 0.0).is_err());
    assert!(crps_sample_sorted(&[], 0.0).is_err());
}

#[test]
fn normal_hpd_endpoints() {
    let mut rng = RngStream::new(1, 0).rng();
    let draws: Vec<f64> = (0..100_000).map(|_| standard_normal(&mut rng)).collect();
    let (lo, hi) = hpd_interval(&draws, 0.95).unwrap();
    assert!((lo + 1.959_964).abs() < 0.02 && (hi - 1.959_964).abs() < 0.02, "({lo}, {hi})");
}

#[test]
fn point_error_examples() {
    assert_eq!(point_errors(&[1.0, 2.0, 3.0], 2.0, DataKind::Count).unwrap().absolute, 0.0);
    assert_eq!(point_errors(&[0.0, 10.0], 4.0, DataKind::Continuous).unwrap().squared, 1.0);
    assert_eq!(predictive_median(&[4.0, 1.0, 2.0, 9.0], DataKind::Count).unwrap(), 2.0);
    assert_eq!(predictive_median(&[4.0, 1.0, 2.0, 9.0], DataKind::Continuous).unwrap(), 3.0);
    assert_eq!(predictive_median(&[5.0, 1.0, 3.0], DataKind::Count).unwrap(), 3.0);
}

fn forecast(values: Vec<f64>, m: usize, h: usize, kinds: Vec<DataKind>) -> ForecastDraws {
    let n = kinds.len();
    let names = (0..n).map(|i| format!("v{i}")).collect();
    ForecastDraws::from_values(values, m, h, n, names, kinds).unwrap()
}

#[test]
fn degenerate_report_reproduces_single_scores() {
    let fc = forecast(vec![0.0, 2.0], 2, 1, vec![DataKind::Continuous]);
    let report = evaluate_forecasts(&[fc], &[Matrix::from_element(1, 1, 1.0)], 0.95).unwrap();
    let row = report.row("v0", 1).unwrap();
    assert_eq!(row.count, 1);
    assert_eq!(row.crps, 0.5);
    assert_eq!(row.mae, 0.0);
    assert_eq!(row.coverage, 1.0);
    assert_eq!(row.interval_size, 2.0);
    assert_eq!(row.interval, IntervalKind::Hpd);
}

#[test]
fn report_shape_errors_and_skips() {
    let fc = forecast((0..2 * 3 * 2).map(f64::from).collect(), 2, 3, vec![DataKind::Continuous, DataKind::Count]);
    let mut actuals = Matrix::from_element(3, 2, 1.0);
    actuals[(2, 0)] = f64::NAN;
    actuals[(2, 1)] = f64::NAN;
    let report = evaluate_forecasts(&[fc.clone()], &[actuals], 0.9).unwrap();
    assert_eq!(report.rows.len(), 2 * 3);
    assert_eq!(report.skipped, 2);
    assert_eq!(report.row("v1", 3).unwrap().count, 0);
    assert!(report.row("v1", 3).unwrap().crps.is_nan());
    assert_eq!(report.row("v1", 1).unwrap().interval, IntervalKind::EqualTailed);
    assert!(evaluate_forecasts(&[fc.clone()], &[Matrix::zeros(2, 2)], 0.9).is_err());
    assert!(evaluate_forecasts(&[fc], &[], 0.9).is_err());
    assert!(evaluate_forecasts(&[], &[], 0.9).is_err());
}

#[test]
fn coverage_matches_counting_oracle() {
    let mut rng = RngStream::new(2, 0).rng();
    let (m, h, origins) = (51, 4, 30);
    let kinds = vec![DataKind::Continuous, DataKind::Count];
    let mut forecasts = Vec::new();
    let mut actuals = Vec::new();
    for _ in 0..origins {
        let values: Vec<f64> = (0..m * h * 2)
            .map(|j| {
                let z = standard_normal(&mut rng);
                if j % 2 == 1 { (3.0 * z).round() } else { z }
            })
            .collect();
        forecasts.push(forecast(values, m, h, kinds.clone()));
        actuals.push(Matrix::from_fn(h, 2, |_, i| {
            let z = 1.3 * standard_normal(&mut rng);
            if i == 1 { (3.0 * z).round() } else { z }
        }));
    }
    let level = 0.8;
    let report = evaluate_forecasts(&forecasts, &actuals, level).unwrap();
    for i in 0..2 {
        for hz in 0..h {
            let mut hits = 0;
            let mut size = 0.0;
            let mut abs = 0.0;
            for (f, a) in forecasts.iter().zip(&actuals) {
                let mut s = f.sample(hz, i);
                s.sort_by(f64::total_cmp);
                let (lo, hi) = if i == 0 {
                    let w = (level * m as f64).ceil() as usize;
                    let best = (0..=m - w).min_by(|&x, &y| (s[x + w - 1] - s[x]).total_cmp(&(s[y + w - 1] - s[y]))).unwrap();
                    (s[best], s[best + w - 1])
                } else {
                    (s[(0.1 * m as f64).ceil() as usize - 1], s[(0.9 * m as f64).ceil() as usize - 1])
                };
                hits += (lo <= a[(hz, i)] && a[(hz, i)] <= hi) as usize;
                size += hi - lo;
                abs += (s[m / 2] - a[(hz, i)]).abs();
            }
            let row = report.row(&format!("v{i}"), hz + 1).unwrap();
            assert_eq!(row.count, origins);
            assert_eq!(row.coverage, hits as f64 / origins as f64);
            assert!((row.interval_size - size / origins as f64).abs() < 1e-12);
            assert!((row.mae - abs / origins as f64).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn hpd_matches_exhaustive_search(draws in prop::collection::vec(-50.0f64..50.0, 1..=50), level in 0.05f64..1.0) {
        let (lo, hi) = hpd_interval(&draws, level).unwrap();
        prop_assert_eq!(hi - lo, brute_hpd(&draws, level));
        let w = (level * draws.len() as f64).ceil() as usize;
        let inside = draws.iter().filter(|&&x| lo <= x && x <= hi).count();
        prop_assert!(inside >= w);
    }

    #[test]
    fn crps_fast_path_agrees(draws in prop::collection::vec(-1e3f64..1e3, 1..200), obs in -1e3f64..1e3) {
        let exact = crps_sample(&draws, obs).unwrap();
        let fast = crps_sample_sorted(&draws, obs).unwrap();
        prop_assert!((exact - fast).abs() <= 1e-12 * (1.0 + exact.abs()), "{} vs {}", exact, fast);
    }

    #[test]
    fn crps_nonnegative_and_zero_only_at_point_mass(draws in prop::collection::vec(-10.0f64..10.0, 1..60), obs in -10.0f64..10.0) {
        let c = crps_sample(&draws, obs).unwrap();
        prop_assert!(c >= -1e-12);
        if draws.iter().all(|&x| x == obs) {
            prop_assert_eq!(c, 0.0);
        } else {
            prop_assert!(c > 0.0);
        }
    }

    #[test]
    fn crps_zero_at_point_mass(x in -10.0f64..10.0, m in 1usize..30) {
        prop_assert_eq!(crps_sample(&vec![x; m], x).unwrap(), 0.0);
        prop_assert_eq!(crps_sample_sorted(&vec![x; m], x).unwrap(), 0.0);
    }

    #[test]
    fn crps_translation_invariant(draws in prop::collection::vec(-10.0f64..10.0, 1..60), obs in -10.0f64..10.0, c in -100.0f64..100.0) {
        let shifted: Vec<f64> = draws.iter().map(|x| x + c).collect();
        let a = crps_sample(&draws, obs).unwrap();
        let b = crps_sample(&shifted, obs + c).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn hpd_never_longer_than_equal_tailed(draws in prop::collection::vec(-30.0f64..30.0, 1..300), level in 0.05f64..0.999) {
        let (hl, hh) = hpd_interval(&draws, level).unwrap();
        let (el, eh) = equal_tailed_interval(&draws, level).unwrap();
        prop_assert!(hh - hl <= eh - el);
    }

    #[test]
    fn intervals_contain_constant(x in -5.0f64..5.0, m in 1usize..40, level in 0.05f64..1.0) {
        let draws = vec![x; m];
        prop_assert_eq!(hpd_interval(&draws, level).unwrap(), (x, x));
        prop_assert_eq!(equal_tailed_interval(&draws, level).unwrap(), (x, x));
    }
}
