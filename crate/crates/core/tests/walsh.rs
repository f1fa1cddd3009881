mod common;

use common::*;
use proptest::prelude::*;
use wick_fbm::kernel::discrete_covariance;
use wick_fbm::montecarlo::{moment_report, sample_paths};
use wick_fbm::walsh::{random_walk_vector, DENSE_MAX_N};
use wick_fbm::{Error, GradedWalsh, Path, Walsh};

/// Wick product straight from the basis rule: `Ξ_A ⋄ Ξ_B = Ξ_{A∪B}` for
/// disjoint `A, B`, zero otherwise.
fn wick_reference(x: &Walsh, y: &Walsh) -> Vec<f64> {
    let size = 1usize << x.n();
    let mut out = vec![0.0; size];
    for a in 0..size {
        for b in 0..size {
            if a & b == 0 {
                out[a | b] += x.coeff(a) * y.coeff(b);
            }
        }
    }
    out
}

fn vec_strategy(n: usize) -> impl Strategy<Value = Walsh> {
    prop::collection::vec(-2.0f64..2.0, 1 << n).prop_map(move |c| Walsh::from_coeffs(n, c).unwrap())
}

fn pair(max_n: usize) -> impl Strategy<Value = (Walsh, Walsh)> {
    (1..=max_n).prop_flat_map(|n| (vec_strategy(n), vec_strategy(n)))
}

fn triple(max_n: usize) -> impl Strategy<Value = (Walsh, Walsh, Walsh)> {
    (1..=max_n).prop_flat_map(|n| (vec_strategy(n), vec_strategy(n), vec_strategy(n)))
}

fn graded_part(n: usize, grade: u32, seed: f64) -> Walsh {
    let c = (0..1usize << n)
        .map(|m| {
            if m.count_ones() == grade {
                ((m as f64 + 1.0) * seed).sin()
            } else {
                0.0
            }
        })
        .collect();
    Walsh::from_coeffs(n, c).unwrap()
}

fn close(a: &Walsh, b: &Walsh, tol: f64) -> bool {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn product_matches_basis_rule((x, y) in pair(7)) {
        let p = x.wick_product(&y).unwrap();
        for (a, b) in p.coeffs().iter().zip(wick_reference(&x, &y)) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn commutative((x, y) in pair(10)) {
        prop_assert!(close(&x.wick_product(&y).unwrap(), &y.wick_product(&x).unwrap(), 1e-12));
    }

    #[test]
    fn associative((x, y, z) in triple(8)) {
        let left = x.wick_product(&y).unwrap().wick_product(&z).unwrap();
        let right = x.wick_product(&y.wick_product(&z).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-11));
    }

    #[test]
    fn bilinear((x, y, z) in triple(8), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let left = x.combine(a, &y, b).unwrap().wick_product(&z).unwrap();
        let right = x.wick_product(&z).unwrap().combine(a, &y.wick_product(&z).unwrap(), b).unwrap();
        prop_assert!(close(&left, &right, 1e-12));
    }

    #[test]
    fn unit_is_neutral((x, _y) in pair(10)) {
        let u = Walsh::unit(x.n()).unwrap();
        prop_assert_eq!(x.wick_product(&u).unwrap(), x.clone());
        prop_assert_eq!(u.wick_product(&x).unwrap(), x);
    }

    #[test]
    fn expectation_is_multiplicative((x, y) in pair(10)) {
        let e = x.wick_product(&y).unwrap().expectation();
        prop_assert!((e - x.expectation() * y.expectation()).abs() < 1e-12);
    }

    #[test]
    fn grades_add(n in 2usize..=9, j in 0u32..=4, k in 0u32..=4, seed in 0.1f64..3.0) {
        let p = graded_part(n, j, seed).wick_product(&graded_part(n, k, seed + 1.0)).unwrap();
        for (mask, c) in p.coeffs().iter().enumerate() {
            if mask.count_ones() != j + k {
                prop_assert_eq!(*c, 0.0);
            }
        }
    }

    #[test]
    fn wick_powers_of_linear_vectors_are_orthogonal(w in prop::collection::vec(-1.0f64..1.0, 1..=9), j in 0usize..6, k in 0usize..6) {
        prop_assume!(j != k);
        let x = Walsh::linear(w.len(), &w).unwrap();
        let ip = x.wick_power(j).inner_product(&x.wick_power(k)).unwrap();
        prop_assert!(ip.abs() < 1e-12, "{ip}");
    }

    #[test]
    fn evaluation_is_linear((x, y) in pair(8), a in -3.0f64..3.0, b in -3.0f64..3.0, bits in any::<u64>()) {
        let p = Path::from_bits(x.n(), bits);
        let lhs = x.combine(a, &y, b).unwrap().evaluate(&p).unwrap();
        let rhs = a * x.evaluate(&p).unwrap() + b * y.evaluate(&p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn pointwise_product_evaluates_pointwise((x, y) in pair(7), bits in any::<u64>()) {
        let p = Path::from_bits(x.n(), bits);
        let prod = x.pointwise_product(&y).unwrap().evaluate(&p).unwrap();
        let direct = x.evaluate(&p).unwrap() * y.evaluate(&p).unwrap();
        prop_assert!((prod - direct).abs() <= 1e-11 * (1.0 + direct.abs()));
    }

    #[test]
    fn norm_is_sum_of_squares((x, _y) in pair(8)) {
        let ss: f64 = x.coeffs().iter().map(|c| c * c).sum();
        prop_assert!((x.norm_sq() - ss).abs() <= 1e-12 * ss.max(1.0));
        // Parseval against the average over all paths
        let avg: f64 = all_paths(x.n()).map(|p| x.evaluate(&p).unwrap().powi(2)).sum::<f64>() / (1u64 << x.n()) as f64;
        prop_assert!((avg - ss).abs() <= 1e-11 * ss.max(1.0));
    }

    #[test]
    fn norm_of_walk_powers_below_time_bound(t in 0.0f64..=1.0, k in 1usize..=8) {
        let g = grid(0.75, 10);
        let b = random_walk_vector::<f64>(&g, t).unwrap();
        let lhs = b.wick_power(k).norm_sq() / factorial(k).powi(2);
        let rhs = t.powf(1.5 * k as f64) / factorial(k);
        prop_assert!(lhs <= rhs + 1e-12, "{lhs} > {rhs}");
    }

    #[test]
    fn graded_round_trip(n in 1usize..=8, max_grade in 0usize..=8, seed in 0.1f64..3.0) {
        let mut dense = Walsh::zero(n).unwrap();
        for g in 0..=(max_grade.min(n) as u32) {
            dense = dense.add(&graded_part(n, g, seed + g as f64)).unwrap();
        }
        let sparse = GradedWalsh::from_dense(&dense, max_grade).unwrap();
        for k in 0..=sparse.max_grade() {
            for &mask in sparse.grade(k).keys() {
                prop_assert_eq!(mask.count_ones() as usize, k);
            }
        }
        prop_assert_eq!(sparse.to_dense().unwrap(), dense);
    }
}

#[test]
fn basis_products() {
    let x1 = Walsh::basis(2, 0b01).unwrap();
    let x2 = Walsh::basis(2, 0b10).unwrap();
    assert_eq!(x1.wick_product(&x1).unwrap(), Walsh::zero(2).unwrap());
    assert_eq!(x1.wick_product(&x2).unwrap(), Walsh::basis(2, 0b11).unwrap());
    let one_plus = Walsh::unit(2).unwrap().add(&x1).unwrap();
    let sq = one_plus.wick_product(&one_plus).unwrap();
    assert_eq!(sq.coeffs(), &[1.0, 2.0, 0.0, 0.0]);
    assert_eq!(sq.dump(), "00\t1e0\n10\t2e0\n");
}

#[test]
fn wick_power_examples() {
    let (b1, b2) = (0.3, -1.7);
    let x = Walsh::linear(2, &[b1, b2]).unwrap();
    assert_eq!(x.wick_power(0), Walsh::unit(2).unwrap());
    assert_eq!(x.wick_power(2).coeffs(), &[0.0, 0.0, 0.0, 2.0 * b1 * b2]);
    assert_eq!(x.wick_power(3), Walsh::zero(2).unwrap());
}

#[test]
fn basis_is_orthonormal() {
    for a in 0..16 {
        for b in 0..16 {
            let ip = Walsh::basis(4, a)
                .unwrap()
                .inner_product(&Walsh::basis(4, b).unwrap())
                .unwrap();
            assert_eq!(ip, if a == b { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn evaluation_examples() {
    let p = Path::new(vec![1, -1]).unwrap();
    assert_eq!(Walsh::basis(2, 0b11).unwrap().evaluate(&p).unwrap(), -1.0);
    for bits in 0..4 {
        assert_eq!(
            Walsh::unit(2).unwrap().evaluate(&Path::from_bits(2, bits)).unwrap(),
            1.0
        );
    }
}

#[test]
fn wick_product_is_not_pointwise() {
    let x = Walsh::basis(1, 1).unwrap();
    let p = Path::new(vec![1]).unwrap();
    let wick = x.wick_product(&x).unwrap().evaluate(&p).unwrap();
    assert_eq!(wick, 0.0);
    assert_eq!(x.evaluate(&p).unwrap() * x.evaluate(&p).unwrap(), 1.0);
}

#[test]
fn dimension_and_capacity_errors() {
    let a = Walsh::unit(3).unwrap();
    let b = Walsh::unit(4).unwrap();
    assert!(matches!(a.wick_product(&b), Err(Error::DimensionMismatch { .. })));
    assert!(matches!(a.inner_product(&b), Err(Error::DimensionMismatch { .. })));
    assert!(a.evaluate(&Path::from_bits(4, 0)).is_err());
    assert!(matches!(Walsh::zero(DENSE_MAX_N + 1), Err(Error::Capacity(_))));
    assert!(Path::new(vec![1, 0, -1]).is_err());
}

#[test]
fn walk_vector_matches_covariance() {
    let g = grid(0.7, 12);
    assert_eq!(random_walk_vector::<f64>(&g, 0.0).unwrap(), Walsh::zero(12).unwrap());
    let ts = [0.0, 0.1, 0.33, 0.5, 0.75, 1.0];
    for &t in &ts {
        let bt = random_walk_vector::<f64>(&g, t).unwrap();
        assert_eq!(bt.expectation(), 0.0);
        for &s in &ts {
            let bs = random_walk_vector::<f64>(&g, s).unwrap();
            let ip = bt.inner_product(&bs).unwrap();
            assert!((ip - discrete_covariance(&g, t, s)).abs() < 1e-15);
        }
    }
}

#[test]
fn norm_agrees_with_sampled_second_moment() {
    let n = 10;
    let mut r = rng(11);
    let c: Vec<f64> = (0..1 << n).map(|_| rand::Rng::gen_range(&mut r, -1.0..1.0)).collect();
    let x = Walsh::from_coeffs(n, c).unwrap();
    let sq: Vec<f64> = sample_paths(n, 100_000, 5)
        .iter()
        .map(|p| x.evaluate(p).unwrap().powi(2))
        .collect();
    let rep = moment_report(&sq).unwrap();
    let exact = x.norm_sq();
    assert!(
        (rep.mean - exact).abs() < 4.0 * rep.std_error,
        "{} vs {exact} (se {})",
        rep.mean,
        rep.std_error
    );
}
