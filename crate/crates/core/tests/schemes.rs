mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use wick_fbm::schemes::{
    discrete_hermite_residual, hermite_remainder_closed_form, rate_constant, scheme_series_path, solve_scheme_exact,
    sottinen_pathwise, u_difference_norm, u_step,
};
use wick_fbm::symfun::{esym, signed_weights};
use wick_fbm::walsh::random_walk_vector;
use wick_fbm::{Error, SchemeSpec, SeriesCoeffs, URecursion, Walsh};

const SYSTEM: SchemeSpec = SchemeSpec::LinearSystem {
    a1: 0.7,
    a2: -1.3,
    b1: 0.4,
    b2: 1.1,
    x0: 0.5,
    y0: -2.0,
};

#[test]
fn two_steps_of_second_order() {
    let n = 6;
    let g = grid(0.75, n);
    let state = URecursion::new(&g, 2).unwrap();
    let state = u_step(u_step(state).unwrap()).unwrap();
    assert_eq!(state.step(), 2);
    let b1 = random_walk_vector::<f64>(&g, 1.0 / n as f64).unwrap();
    let b2 = random_walk_vector::<f64>(&g, 2.0 / n as f64).unwrap();
    let want = b1.wick_product(&b2).unwrap().scaled(2.0);
    let got = state.u(2).to_dense().unwrap();
    assert!(got.max_abs_diff(&want).unwrap() < 1e-15);
    assert!(got.max_abs_diff(&b2.wick_power(2)).unwrap() > 1e-3);
}

#[test]
fn recursion_structure() {
    let n = 8;
    let g = grid(0.7, n);
    let mut state = URecursion::new(&g, 5).unwrap();
    for l in 1..=n {
        state.advance().unwrap();
        let unit = state.u(0).to_dense().unwrap();
        assert_eq!(unit, Walsh::unit(n).unwrap());
        let walk = random_walk_vector::<f64>(&g, l as f64 / n as f64).unwrap();
        assert!(state.u(1).to_dense().unwrap().max_abs_diff(&walk).unwrap() < 1e-15);
        for k in 0..=5 {
            let u = state.u(k);
            if k > l {
                assert_eq!(u.support_len(), 0);
            }
            for &mask in u.grade(k).keys() {
                assert_eq!(mask.count_ones() as usize, k);
                assert!(mask < 1 << l, "support outside 1..=l");
            }
        }
    }
    assert!(state.advance().is_err(), "stepping past n must fail");
}

#[test]
fn recursion_matches_injective_map_sums() {
    for n in [3, 5, 6] {
        let g = grid(0.8, n);
        let mut state = URecursion::new(&g, 4.min(n)).unwrap();
        for l in 1..=n {
            state.advance().unwrap();
            for mask in 1u64..1 << l {
                let k = mask.count_ones() as usize;
                if k > 4 {
                    continue;
                }
                let (inj, non, abs) = map_sums(&g, l, mask);
                let u = state.u(k).get(mask) / factorial(k);
                assert!((u - inj).abs() <= 1e-12 * abs, "n={n} l={l} C={mask:b}");
                assert!((b_product(&g, l, mask) - u - non).abs() <= 1e-12 * abs);
            }
        }
    }
}

#[test]
fn support_cap_aborts() {
    let g = grid(0.75, 12);
    let mut state = URecursion::new(&g, 6).unwrap().with_support_cap(100);
    assert!(matches!(state.run_to(12), Err(Error::Capacity(_))));
    assert!(URecursion::new(&g, 13).is_err());
}

#[test]
fn difference_vanishes_for_affine_coefficients() {
    let g = grid(0.75, 10);
    let affine = SeriesCoeffs::from_table("affine", vec![0.3, -1.2]);
    let d = u_difference_norm(&g, &affine, 1.0).unwrap();
    assert!(d.value.abs() < 1e-28, "{}", d.value);
}

/// `E|Σ a_k e_k(b s) − Σ a_k/k!·U^k(s)|²` by averaging over every path.
fn exhaustive_difference(g: &wick_fbm::KernelGrid, coeffs: &SeriesCoeffs, l: usize) -> f64 {
    let n = g.n();
    let mut state = URecursion::new(g, l).unwrap();
    state.run_to(l).unwrap();
    let dense: Vec<Walsh> = (0..=l).map(|k| state.u(k).to_dense().unwrap()).collect();
    let a = coeffs.take(l).unwrap();
    let t = l as f64 / n as f64;
    all_paths(n)
        .map(|p| {
            let v = signed_weights::<f64>(g, t, &p).unwrap();
            let e = esym(&v, l);
            let mut diff = 0.0;
            for k in 0..=l {
                diff += a[k] * (e.e(k) - dense[k].evaluate(&p).unwrap() / factorial(k));
            }
            diff * diff
        })
        .sum::<f64>()
        / (1u64 << n) as f64
}

#[test]
fn difference_norm_against_path_average() {
    let g = grid(0.75, 9);
    for coeffs in [
        SeriesCoeffs::exponential(),
        SeriesCoeffs::sine(),
        SeriesCoeffs::scaled_exponential(1.7),
    ] {
        for &t in &[0.5, 1.0] {
            let d = u_difference_norm(&g, &coeffs, t).unwrap();
            let brute = exhaustive_difference(&g, &coeffs, g.step_of(t));
            assert!(scaled_err(d.value, brute, 1e-14) < 1e-10, "{} vs {brute}", d.value);
            assert!(d.value <= d.bound);
        }
    }
}

#[test]
fn rate_constant_series() {
    // closed form against term-by-term summation of Σ_{k≥2} C^{2k}(k−1)³ t^{2H(k−1)}/(k−1)!
    let cert = wick_fbm::Certificate::geometric(1.3);
    let (h, t) = (0.7f64, 0.8f64);
    let direct: f64 = (2..200)
        .map(|k| {
            let j = (k - 1) as f64;
            1.3f64.powi(2 * k as i32) * j.powi(3) * t.powf(2.0 * h * j) / factorial(k - 1)
        })
        .sum();
    assert!(rel_err(rate_constant(cert, h, t), direct) < 1e-12);
}

#[test]
fn hermite_residual_first_order_is_zero() {
    let g = grid(0.75, 8);
    for t in [0.3, 1.0] {
        let r = discrete_hermite_residual::<f64>(&g, t, 1).unwrap();
        assert!(r.residual.norm_sq() < 1e-28);
    }
    assert!(discrete_hermite_residual::<f64>(&g, 1.0, 0).is_err());
}

#[test]
fn hermite_residual_against_pathwise_formula() {
    let n = 8;
    let g = grid(0.6, n);
    for order in 1..=4 {
        let t = 0.875;
        let r = discrete_hermite_residual::<f64>(&g, t, order).unwrap();
        let closed = hermite_remainder_closed_form::<f64>(&g, t, order).unwrap();
        let var: f64 = g.row_at(t).iter().map(|b| b * b).sum();
        for p in all_paths(n) {
            let v = signed_weights::<f64>(&g, t, &p).unwrap();
            let e: Vec<f64> = (0..=order + 1).map(|k| brute_esym(&v, k)).collect();
            let bt: f64 = v.iter().sum();
            let direct = factorial(order + 1) * e[order + 1]
                - (bt * factorial(order) * e[order] - order as f64 * var * factorial(order - 1) * e[order - 1]);
            let scale =
                factorial(order + 1) * esym(&v.iter().map(|x| x.abs()).collect::<Vec<_>>(), order + 1).e(order + 1);
            assert!((r.residual.evaluate(&p).unwrap() - direct).abs() <= 1e-12 * scale.max(1e-12));
            assert!((closed.evaluate(&p).unwrap() - direct).abs() <= 1e-12 * scale.max(1e-12));
        }
        assert!(r.residual.norm_sq() <= r.bound);
    }
}

#[test]
fn geometric_mean_is_one() {
    for n in [5, 13] {
        let sol = solve_scheme_exact::<f64>(&grid(0.75, n), &SchemeSpec::Geometric).unwrap();
        for l in 0..=n {
            assert!((sol.at(0, l).expectation() - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn drift_factorises() {
    let n = 10;
    let g = grid(0.75, n);
    let (mu, sigma, s0) = (0.5, 1.3, 2.0);
    let s = solve_scheme_exact::<f64>(&g, &SchemeSpec::Drift { mu, sigma, s0 }).unwrap();
    let growth = 1.0 + mu / n as f64;
    let v = solve_scheme_exact::<f64>(
        &g,
        &SchemeSpec::Drift {
            mu: 0.0,
            sigma: sigma / growth,
            s0: 1.0,
        },
    )
    .unwrap();
    for l in 0..=n {
        let w = s0 * growth.powi(l as i32);
        let vw = v.at(0, l).scaled(w);
        let scale = s.at(0, l).coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
        assert!(s.at(0, l).max_abs_diff(&vw).unwrap() <= 1e-12 * scale);
    }
}

#[test]
fn linear_system_is_coefficient_series() {
    let n = 9;
    let g = grid(0.65, n);
    for spec in [SYSTEM, SchemeSpec::SinCos] {
        let sol = solve_scheme_exact::<f64>(&g, &spec).unwrap();
        let (a, b) = spec.system_coeffs().unwrap();
        let mut state = URecursion::new(&g, n).unwrap();
        for l in 1..=n {
            state.advance().unwrap();
            for (c, coeffs) in [(0, &a), (1, &b)] {
                let mut series = Walsh::zero(n).unwrap();
                for k in 0..=l {
                    let u = state.u(k).to_dense().unwrap();
                    series = series.combine(1.0, &u, coeffs.raw(k) / factorial(k)).unwrap();
                }
                let exact = sol.at(c, l);
                let scale = exact.norm_sq().sqrt().max(1.0);
                assert!(exact.max_abs_diff(&series).unwrap() <= 1e-10 * scale);
            }
        }
    }
}

#[test]
fn pathwise_scheme_matches_pointwise_walsh_products() {
    let n = 8;
    let g = grid(0.75, n);
    let mut x = Walsh::unit(n).unwrap();
    let mut steps = vec![x.clone()];
    for l in 1..=n {
        let inc = Walsh::linear(n, g.increment_row(l)).unwrap();
        x = x.add(&x.pointwise_product(&inc).unwrap()).unwrap();
        steps.push(x.clone());
    }
    for p in all_paths(n) {
        let xs = sottinen_pathwise::<f64>(&g, &p).unwrap();
        assert_eq!(xs[0], 1.0);
        assert_eq!(xs[1], 1.0 + g.b(1, 1) * p.sign(1) as f64);
        for l in 0..=n {
            assert!(rel_err(xs[l], steps[l].evaluate(&p).unwrap()) < 1e-12);
        }
    }
}

#[test]
fn series_path_examples() {
    let g = grid(0.75, 128);
    let mut r = rng(12);
    for _ in 0..5 {
        let p = random_path(&mut r, 128);
        let v = scheme_series_path::<f64>(&g, &SchemeSpec::Geometric, 1.0, &p).unwrap();
        let product: f64 = g
            .row(128)
            .iter()
            .zip(p.signs())
            .map(|(b, &s)| 1.0 + b * s as f64)
            .product();
        assert!(rel_err(v[0].value, product) < 1e-12);
        let sc = scheme_series_path::<f64>(&g, &SchemeSpec::SinCos, 0.5, &p).unwrap();
        let w = signed_weights::<f64>(&g, 0.5, &p).unwrap();
        let e = esym(&w, w.len());
        let sin: f64 = (0..=w.len()).map(|k| SeriesCoeffs::sine().raw(k) * e.e(k)).sum();
        let cos: f64 = (0..=w.len()).map(|k| SeriesCoeffs::cosine().raw(k) * e.e(k)).sum();
        assert_eq!(sc.len(), 2);
        assert!(scaled_err(sc[0].value, sin, 1.0) < 1e-12);
        assert!(scaled_err(sc[1].value, cos, 1.0) < 1e-12);
    }
    assert!(scheme_series_path::<f64>(&g, &SchemeSpec::PathwiseSottinen, 1.0, &random_path(&mut r, 128)).is_err());
}

#[test]
fn series_substitute_within_rate_bound() {
    for n in [8, 11] {
        let g = grid(0.75, n);
        for spec in [
            SchemeSpec::Geometric,
            SchemeSpec::Drift {
                mu: 0.5,
                sigma: 1.0,
                s0: 1.0,
            },
            SchemeSpec::SinCos,
        ] {
            let sol = solve_scheme_exact::<f64>(&g, &spec).unwrap();
            let families = spec.series_for(n, n).unwrap();
            for (c, coeffs) in families.iter().enumerate() {
                let ms = all_paths(n)
                    .map(|p| {
                        let fast = scheme_series_path::<f64>(&g, &spec, 1.0, &p).unwrap()[c].value;
                        (fast - sol.at(c, n).evaluate(&p).unwrap()).powi(2)
                    })
                    .sum::<f64>()
                    / (1u64 << n) as f64;
                let cert = coeffs.require_certificate().unwrap();
                let bound = rate_constant(cert, 0.75, 1.0) * (n as f64).powf(-0.5);
                assert!(ms <= bound, "{} n={n}: {ms} > {bound}", spec.name());
            }
        }
    }
}

#[test]
fn spec_validation() {
    assert!(SchemeSpec::Drift {
        mu: 0.0,
        sigma: 0.0,
        s0: 1.0
    }
    .validate()
    .is_err());
    assert!(SchemeSpec::Drift {
        mu: 0.0,
        sigma: -1.0,
        s0: 1.0
    }
    .validate()
    .is_err());
    assert!(SchemeSpec::Drift {
        mu: -20.0,
        sigma: 1.0,
        s0: 1.0
    }
    .validate_for(8)
    .is_err());
    assert!(SchemeSpec::PathwiseSottinen.series_for(8, 8).is_err());
    assert_eq!(SYSTEM.m_ab(), Some(2.6));
}

proptest! {
    #[test]
    fn system_coefficients_obey_growth_bound(
        m in prop::array::uniform4(-3.0f64..3.0),
        x0 in -5.0f64..5.0,
        y0 in -5.0f64..5.0,
    ) {
        let spec = SchemeSpec::LinearSystem { a1: m[0], a2: m[1], b1: m[2], b2: m[3], x0, y0 };
        let (a, b) = spec.system_coeffs().unwrap();
        let bound = x0.abs().max(y0.abs());
        let mab = spec.m_ab().unwrap();
        // independent recursion
        let (mut x, mut y) = (x0, y0);
        for k in 0..=50 {
            prop_assert!(x.abs() <= bound * mab.powi(k) * (1.0 + 1e-12));
            prop_assert!(y.abs() <= bound * mab.powi(k) * (1.0 + 1e-12));
            prop_assert!(rel_err(a.get(k as usize).unwrap(), x) < 1e-12 || x == 0.0);
            prop_assert!(rel_err(b.get(k as usize).unwrap(), y) < 1e-12 || y == 0.0);
            (x, y) = (m[0] * x + m[1] * y, m[2] * x + m[3] * y);
        }
    }

    #[test]
    fn inner_product_lemma(t in 0.0f64..=1.0, s in 0.0f64..=1.0, order in 1i32..=10) {
        let g = grid(0.75, 64);
        let x = g.row_at(t);
        let y = g.row_at(s);
        let len = x.len().max(y.len());
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        let (mut xx, mut yy, mut xy, mut dd) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..len {
            let (a, b) = (get(x, i), get(y, i));
            xx += a * a;
            yy += b * b;
            xy += a * b;
            dd += (a - b) * (a - b);
        }
        let lhs = xx.powi(order) + yy.powi(order) - 2.0 * xy.powi(order);
        let rhs = 2f64.powi(order + 1) * (xx.sqrt() + yy.sqrt()).powi(2 * (order - 1)) * dd;
        prop_assert!(lhs <= rhs + 1e-14, "{lhs} > {rhs}");
    }
}

#[test]
fn random_hurst_grids_satisfy_rate_bound() {
    let mut r = rng(30);
    for _ in 0..3 {
        let h: f64 = r.gen_range(0.55..0.95);
        let g = wick_fbm::build_grid(wick_fbm::HurstParam::new(h).unwrap(), 10, TOL).unwrap();
        let d = u_difference_norm(&g, &SeriesCoeffs::exponential(), 1.0).unwrap();
        assert!(d.value <= d.bound, "H={h}");
    }
}
