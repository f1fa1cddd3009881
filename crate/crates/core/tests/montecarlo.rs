mod common;

use common::*;
use wick_fbm::kernel::discrete_covariance;
use wick_fbm::montecarlo::{
    ks_distance, moment_report, run_study, sample_paths, CheckStatus, PathSampler, StudyConfig, StudyRow, StudyTarget,
};
use wick_fbm::schemes::{scheme_series_path, solve_scheme_exact};
use wick_fbm::{Error, HurstParam, SchemeSpec, SeriesCoeffs, Walsh};

#[test]
fn paths_are_deterministic_per_index() {
    let a = sample_paths(40, 50, 9);
    let b = sample_paths(40, 80, 9);
    assert_eq!(a[..], b[..50]);
    assert_eq!(PathSampler::new(40, 9).path(17), a[17]);
    assert_ne!(sample_paths(40, 50, 10), a);
}

#[test]
fn path_coordinates_are_balanced_and_uncorrelated() {
    let (n, count) = (64, 100_000);
    let paths = sample_paths(n, count, 1);
    let limit = 4.0 / (count as f64).sqrt();
    let col = |i: usize| paths.iter().map(|p| p.signs()[i] as f64).collect::<Vec<_>>();
    let cols: Vec<Vec<f64>> = (0..n).map(col).collect();
    for c in &cols {
        let mean = c.iter().sum::<f64>() / count as f64;
        assert!(mean.abs() < limit, "{mean}");
    }
    for i in 0..n {
        for j in [(i + 1) % n, n - 1 - i, (i + 17) % n] {
            if i == j {
                continue;
            }
            let corr = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum::<f64>() / count as f64;
            assert!(corr.abs() < limit, "({i},{j}): {corr}");
        }
    }
}

#[test]
fn moment_reports() {
    let r = moment_report(&[2.5; 10]).unwrap();
    assert_eq!((r.mean, r.variance, r.count), (2.5, 0.0, 10));
    let alt: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let r = moment_report(&alt).unwrap();
    assert_eq!(r.mean, 0.0);
    assert!((r.variance - 1000.0 / 999.0).abs() < 1e-12);
    assert!((r.std_error - (r.variance / 1000.0).sqrt()).abs() < 1e-15);
    assert!(matches!(moment_report(&[1.0]), Err(Error::Degenerate(_))));
    assert!(moment_report(&[1.0, f64::NAN]).is_err());
}

#[test]
fn ks_examples() {
    assert_eq!(ks_distance(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap(), 0.0);
    assert_eq!(ks_distance(&[1.0, 2.0], &[5.0, 6.0, 7.0]).unwrap(), 1.0);
    // empirical CDFs differ most just after 1: 2/3 vs 0
    assert!((ks_distance(&[1.0, 1.0, 4.0], &[2.0, 3.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    // ties across samples are evaluated after both jumps
    assert!((ks_distance(&[1.0, 2.0], &[2.0, 3.0]).unwrap() - 0.5).abs() < 1e-15);
    assert!(ks_distance(&[], &[1.0]).is_err());
    assert!(ks_distance(&[1.0], &[f64::NAN]).is_err());
}

#[test]
fn geometric_sample_mean_is_one() {
    let g = grid(0.75, 64);
    let vals = PathSampler::new(64, 3)
        .map(50_000, |p| {
            Ok(scheme_series_path::<f64>(&g, &SchemeSpec::Geometric, 1.0, p)?[0].value)
        })
        .unwrap();
    let r = moment_report(&vals).unwrap();
    assert!((r.mean - 1.0).abs() < 4.0 * r.std_error, "{r:?}");
}

#[test]
fn sampled_means_match_empty_set_coefficient() {
    let n = 10;
    let g = grid(0.7, n);
    let sol = solve_scheme_exact::<f64>(&g, &SchemeSpec::SinCos).unwrap();
    let mut r = rng(2);
    let random = Walsh::from_coeffs(
        n,
        (0..1 << n).map(|_| rand::Rng::gen_range(&mut r, -1.0..1.0)).collect(),
    )
    .unwrap();
    for x in [sol.at(0, n), sol.at(1, n), &random] {
        let vals = PathSampler::new(n, 4).map(40_000, |p| x.evaluate(p)).unwrap();
        let rep = moment_report(&vals).unwrap();
        assert!(
            (rep.mean - x.expectation()).abs() < 4.0 * rep.std_error,
            "{rep:?} vs {}",
            x.expectation()
        );
    }
}

fn cfg(n_list: Vec<usize>, target: StudyTarget) -> StudyConfig {
    let mut c = StudyConfig::new(HurstParam::new(0.75).unwrap(), n_list, target);
    c.cache_dir = Some(cache_dir());
    c
}

#[test]
fn study_validation() {
    let mut c = cfg(vec![16, 8], StudyTarget::Scheme(SchemeSpec::Geometric));
    assert!(run_study(&c).is_err());
    c.n_list = vec![8];
    c.paths = 1;
    assert!(run_study(&c).is_err());
    c.paths = 10;
    c.times = vec![1.5];
    assert!(run_study(&c).is_err());
    c.times = vec![];
    assert!(run_study(&c).unwrap().is_empty());
}

#[test]
fn identity_study_reproduces_walk_variance() {
    let mut c = cfg(vec![32], StudyTarget::Series(SeriesCoeffs::identity()));
    c.paths = 100_000;
    c.times = vec![0.5, 1.0];
    let rows = run_study(&c).unwrap();
    let g = grid(0.75, 32);
    for row in &rows {
        let v = discrete_covariance(&g, row.t, row.t);
        assert!((row.exact_variance - v).abs() < 1e-14);
        assert!((row.variance - v).abs() < 4.0 * row.variance_std_error, "{row:?}");
    }
}

#[test]
fn default_study_passes_every_check_and_is_deterministic() {
    let mut c = cfg(vec![16, 32, 64, 128, 256], StudyTarget::Scheme(SchemeSpec::Geometric));
    c.paths = 10_000;
    let rows = run_study(&c).unwrap();
    assert_eq!(rows.len(), 20);
    for row in &rows {
        assert!(row.all_pass(), "{row:?}");
        assert_ne!(row.wick_increment, CheckStatus::Skip);
        assert_ne!(row.increment_check, CheckStatus::Skip);
        assert!((row.exact_mean - 1.0).abs() < 1e-15);
    }
    assert_eq!(
        rows.iter()
            .filter(|r| r.n == 16 && r.u_rate == CheckStatus::Skip)
            .count(),
        4
    );
    let again = run_study(&c).unwrap();
    assert_eq!(rows, again);
    for col in StudyRow::COLUMNS {
        assert!(rows[0].cell(col).is_some());
    }
}

#[test]
fn small_n_study_runs_exact_checks() {
    let mut c = cfg(
        vec![8, 12],
        StudyTarget::Scheme(SchemeSpec::Drift {
            mu: 0.5,
            sigma: 1.0,
            s0: 1.0,
        }),
    );
    c.paths = 2000;
    for row in run_study(&c).unwrap() {
        assert!(row.all_pass());
        assert_eq!(row.u_rate, CheckStatus::Pass);
    }
}
