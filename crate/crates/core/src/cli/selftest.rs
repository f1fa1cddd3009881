//! Invariant suites at small `n`, run by the `selftest` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::kernel::{build_grid, HurstParam, KernelGrid};
use crate::scalar::factorial;
use crate::schemes::{
    discrete_hermite_residual, hermite_remainder_closed_form, solve_scheme_exact, SchemeSpec, URecursionState,
};
use crate::symfun::{wick_power_increment_norm, wick_power_inner, wick_power_path};
use crate::walsh::{random_walk_vector, Path, WalshVector};

/// Outcome of one suite at one size.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub n: usize,
    pub cases: usize,
    /// Largest observed error (or `lhs/rhs` ratio for inequalities).
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl SuiteResult {
    fn new(suite: &'static str, n: usize, cases: usize, worst: f64, tolerance: f64) -> Self {
        Self {
            suite,
            n,
            cases,
            worst,
            tolerance,
            pass: worst <= tolerance,
        }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Result<WalshVector<f64>> {
    WalshVector::from_coeffs(n, (0..1usize << n).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn random_path(rng: &mut ChaCha8Rng, n: usize) -> Path {
    Path::from_bits(n, rng.gen::<u64>())
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(f64::MIN_POSITIVE)
}

fn walsh_algebra(rng: &mut ChaCha8Rng, n: usize) -> Result<SuiteResult> {
    let mut worst = 0.0f64;
    let cases = 10;
    for _ in 0..cases {
        let (x, y, z) = (random_vector(rng, n)?, random_vector(rng, n)?, random_vector(rng, n)?);
        let a = rng.gen_range(-2.0..2.0);
        let xy = x.wick_product(&y)?;
        worst = worst.max(xy.max_abs_diff(&y.wick_product(&x)?)?);
        let left = xy.wick_product(&z)?;
        let right = x.wick_product(&y.wick_product(&z)?)?;
        worst = worst.max(left.max_abs_diff(&right)? / left.norm_sq().sqrt().max(1.0));
        let lin = x.wick_product(&y.combine(a, &z, 1.0)?)?;
        let split = xy.combine(a, &x.wick_product(&z)?, 1.0)?;
        worst = worst.max(lin.max_abs_diff(&split)? / lin.norm_sq().sqrt().max(1.0));
        let unit = WalshVector::unit(n)?;
        worst = worst.max(x.wick_product(&unit)?.max_abs_diff(&x)?);
        let p = random_path(rng, n);
        let prod = x.pointwise_product(&y)?.evaluate(&p)?;
        let (ex, ey) = (x.evaluate(&p)?, y.evaluate(&p)?);
        worst = worst.max(rel(prod, ex * ey, (ex * ey).abs().max(1.0)));
    }
    Ok(SuiteResult::new("walsh_algebra", n, cases, worst, 1e-12))
}

fn random_grid(rng: &mut ChaCha8Rng, n: usize, tol: f64) -> Result<KernelGrid> {
    build_grid(HurstParam::new(rng.gen_range(0.55..0.95))?, n, tol)
}

fn symfun_equivalence(rng: &mut ChaCha8Rng, n: usize, tol: f64) -> Result<SuiteResult> {
    let grid = random_grid(rng, n, tol)?;
    let mut worst = 0.0f64;
    let cases = 20;
    for _ in 0..cases {
        let t = rng.gen_range(0.0..=1.0);
        let s = rng.gen_range(0.0..=1.0);
        let k = rng.gen_range(0..=n);
        let p = random_path(rng, n);
        let fast = wick_power_path::<f64>(&grid, t, k, &p)?;
        let walk = random_walk_vector::<f64>(&grid, t)?;
        let power = walk.wick_power(k);
        let dense = power.evaluate(&p)?;
        let scale: f64 = power.coeffs().iter().map(|c| c.abs()).sum();
        worst = worst.max(rel(fast, dense, scale));
        let order = k.max(1);
        let inner = wick_power_inner::<f64>(&grid, t, s, order)?;
        let other = random_walk_vector::<f64>(&grid, s)?.wick_power(order);
        let dense_inner = walk.wick_power(order).inner_product(&other)?;
        worst = worst.max(rel(inner, dense_inner, dense_inner.abs()));
    }
    Ok(SuiteResult::new("symfun_equivalence", n, cases, worst, 1e-10))
}

/// `Σ_m Π_{p∈C} d[m(p)][p]` over maps `m: C → {1..l}`, split into
/// injective and non-injective maps, plus the sum of absolute terms.
fn map_sums(grid: &KernelGrid, l: usize, mask: u64) -> (f64, f64, f64) {
    let elems: Vec<usize> = (0..64).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
    let k = elems.len();
    let (mut inj, mut non, mut abs) = (0.0, 0.0, 0.0);
    let total = l.pow(k as u32);
    for code in 0..total {
        let mut c = code;
        let mut targets = Vec::with_capacity(k);
        for _ in 0..k {
            targets.push(c % l + 1);
            c /= l;
        }
        let term: f64 = elems.iter().zip(&targets).map(|(&p, &r)| grid.d(r, p)).product();
        let mut sorted = targets.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() == k {
            inj += term;
        } else {
            non += term;
        }
        abs += term.abs();
    }
    (inj, non, abs)
}

fn prop41(rng: &mut ChaCha8Rng, n: usize, tol: f64) -> Result<SuiteResult> {
    let grid = random_grid(rng, n, tol)?;
    let max_order = 4.min(n);
    let mut state = URecursionState::<f64>::new(&grid, max_order)?;
    let mut worst = 0.0f64;
    let mut cases = 0;
    for l in 1..=n {
        state.advance()?;
        for mask in 1u64..1 << l {
            let k = mask.count_ones() as usize;
            if k > max_order {
                continue;
            }
            let (inj, non, abs) = map_sums(&grid, l, mask);
            let u = state.u(k).get(mask) / factorial::<f64>(k);
            let b_c: f64 = (0..l)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| grid.b(l, i + 1))
                .product();
            worst = worst.max(rel(u, inj, abs)).max(rel(b_c - u, non, abs));
            cases += 1;
        }
    }
    Ok(SuiteResult::new("prop41_closed_forms", n, cases, worst, 1e-12))
}

fn prop51(n: usize, hurst: f64, tol: f64) -> Result<Vec<SuiteResult>> {
    let grid = build_grid(HurstParam::new(hurst)?, n, tol)?;
    let mut closed_worst = 0.0f64;
    let mut ratio_worst = 0.0f64;
    let mut cases = 0;
    for order in 1..=4 {
        for &t in &[0.5, 1.0] {
            let r = discrete_hermite_residual::<f64>(&grid, t, order)?;
            let closed = hermite_remainder_closed_form::<f64>(&grid, t, order)?;
            let norm = r.residual.norm_sq();
            let closed_norm = closed.norm_sq();
            // magnitude of the terms that cancel in the residual
            let scale = wick_power_inner::<f64>(&grid, t, t, order + 1)?
                .sqrt()
                .max(closed_norm.sqrt())
                .max(f64::MIN_POSITIVE);
            closed_worst = closed_worst.max(r.residual.max_abs_diff(&closed)? / scale);
            if closed_norm > 0.0 {
                closed_worst = closed_worst.max(rel(norm, closed_norm, closed_norm));
            }
            ratio_worst = ratio_worst.max(norm / r.bound);
            cases += 1;
        }
    }
    Ok(vec![
        SuiteResult::new("prop51_remainder", n, cases, closed_worst, 1e-10),
        SuiteResult::new("prop51_bound_ratio", n, cases, ratio_worst, 1.0),
    ])
}

fn wick_increment(rng: &mut ChaCha8Rng, n: usize, tol: f64) -> Result<SuiteResult> {
    let grid = random_grid(rng, n, tol)?;
    let h = grid.hurst().value();
    let mut worst = 0.0f64;
    let cases = 20;
    for _ in 0..cases {
        let t = rng.gen_range(0.0..=1.0);
        let s = rng.gen_range(0.0..=1.0);
        let gap = (grid.step_of(t) as f64 - grid.step_of(s) as f64).abs() / n as f64;
        for order in 1..=10.min(n) {
            let lhs = wick_power_increment_norm::<f64>(&grid, t, s, order)?;
            let rhs = 8f64.powi(order as i32) * gap.powf(2.0 * h);
            let ratio = if rhs > 0.0 {
                lhs / rhs
            } else if lhs.abs() <= 1e-14 {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(ratio);
        }
    }
    Ok(SuiteResult::new("wick_increment_ratio", n, cases, worst, 1.0))
}

fn geometric_unit_mean(n: usize, tol: f64) -> Result<SuiteResult> {
    let grid = build_grid(HurstParam::new(0.75)?, n, tol)?;
    let sol = solve_scheme_exact::<f64>(&grid, &SchemeSpec::Geometric)?;
    let worst = (0..=n)
        .map(|l| (sol.at(0, l).expectation() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(SuiteResult::new("geometric_unit_mean", n, n + 1, worst, 1e-12))
}

/// Every suite, deterministic in `seed`.
pub fn run_selftest(seed: u64, tol: f64) -> Result<Vec<SuiteResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for n in [3, 5, 7] {
        out.push(walsh_algebra(&mut rng, n)?);
    }
    for n in [6, 9, 12] {
        out.push(symfun_equivalence(&mut rng, n, tol)?);
    }
    for n in [4, 5, 6] {
        out.push(prop41(&mut rng, n, tol)?);
    }
    for n in [6, 8, 10] {
        for h in [0.6, 0.75] {
            out.extend(prop51(n, h, tol)?);
        }
    }
    for n in [8, 12] {
        out.push(wick_increment(&mut rng, n, tol)?);
    }
    for n in [8, 12] {
        out.push(geometric_unit_mean(n, tol)?);
    }
    Ok(out)
}
