//! Helpers shared by the integration tests: cached grids and independent
//! reference computations.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wick_fbm::{GridCache, HurstParam, KernelGrid, Path};

pub const TOL: f64 = 1e-9;

pub fn cache_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("grids")
}

pub fn grid(h: f64, n: usize) -> KernelGrid {
    GridCache::new(cache_dir())
        .get_or_build(HurstParam::new(h).unwrap(), n, TOL)
        .unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_path(rng: &mut impl Rng, n: usize) -> Path {
    Path::new((0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect()).unwrap()
}

pub fn all_paths(n: usize) -> impl Iterator<Item = Path> {
    (0u64..1 << n).map(move |bits| Path::from_bits(n, bits))
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Relative error with an absolute floor `scale` for values near zero.
pub fn scaled_err(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(scale)
}

/// `e_k(v)` by enumerating every `k`-subset.
pub fn brute_esym(v: &[f64], k: usize) -> f64 {
    let m = v.len();
    if k > m {
        return 0.0;
    }
    let mut total = 0.0;
    for mask in 0u64..1 << m {
        if mask.count_ones() as usize != k {
            continue;
        }
        let mut p = 1.0;
        for (i, x) in v.iter().enumerate() {
            if mask >> i & 1 == 1 {
                p *= x;
            }
        }
        total += p;
    }
    total
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// Tanh-sinh quadrature of `f(d)` over `d ∈ (0, len)`, where `d` is the
/// distance from the left endpoint (passed exactly, so endpoint singularities
/// in `d` are resolved). The step is halved until two levels agree to `tol`.
pub fn tanh_sinh(len: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let eval = |h: f64| {
        let mut sum = 0.0;
        let mut j: i64 = -((6.0 / h) as i64);
        while (j as f64) * h <= 6.0 {
            let tau = j as f64 * h;
            let y = FRAC_PI_2 * tau.sinh();
            // len (1 + tanh y)/2 without cancellation near the left end
            let left_dist = len / (1.0 + (-2.0 * y).exp());
            let w = FRAC_PI_2 * tau.cosh() / y.cosh().powi(2) * len / 2.0;
            if left_dist > 0.0 && left_dist < len && w > 0.0 && w.is_finite() {
                sum += w * f(left_dist);
            }
            j += 1;
        }
        sum * h
    };
    let mut h = 0.5;
    let mut prev = eval(h);
    for _ in 0..10 {
        h /= 2.0;
        let cur = eval(h);
        if (cur - prev).abs() <= tol * cur.abs() {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Kernel `z_H(t, s)` straight from the untransformed integral.
pub fn kernel_reference(h: f64, t: f64, s: f64) -> f64 {
    if t <= s {
        return 0.0;
    }
    let a = h - 0.5;
    let c = c_h_libm(h);
    let inner = tanh_sinh(t - s, 1e-14, |d| (s + d).powf(a) * d.powf(a - 1.0));
    c * a * s.powf(-a) * inner
}

/// `c_H` with libm's Gamma.
pub fn c_h_libm(h: f64) -> f64 {
    use libm::tgamma;
    (2.0 * h * tgamma(1.5 - h) / (tgamma(h + 0.5) * tgamma(2.0 - 2.0 * h))).sqrt()
}

/// Sums of `Π_{p∈C} d[m(p)][p]` over all maps `m: C → {1..l}`, split into
/// (injective, non-injective), plus the sum of absolute terms.
pub fn map_sums(grid: &KernelGrid, l: usize, mask: u64) -> (f64, f64, f64) {
    let elems: Vec<usize> = (0..64).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
    let k = elems.len() as u32;
    let (mut inj, mut non, mut abs) = (0.0, 0.0, 0.0);
    for code in 0..l.pow(k) {
        let mut c = code;
        let mut used = 0u64;
        let mut injective = true;
        let mut term = 1.0;
        for &p in &elems {
            let r = c % l + 1;
            c /= l;
            if used >> r & 1 == 1 {
                injective = false;
            }
            used |= 1 << r;
            term *= grid.d(r, p);
        }
        if injective {
            inj += term;
        } else {
            non += term;
        }
        abs += term.abs();
    }
    (inj, non, abs)
}

/// `Π_{i∈C} b[l][i]`.
pub fn b_product(grid: &KernelGrid, l: usize, mask: u64) -> f64 {
    (0..l)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| grid.b(l, i + 1))
        .product()
}
