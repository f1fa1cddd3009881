use super::SchemeSpec;
use crate::error::{Error, Result};
use crate::kernel::{molchan_golosov_constant, KernelGrid};
use crate::scalar::{factorial, Real};
use crate::symfun::{series_of_weights, signed_weights, SeriesEval};
use crate::walsh::{check_dims, random_walk_vector, Path, WalshVector};

/// Walsh vectors of every component at steps `0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSolution<T> {
    pub spec: SchemeSpec,
    /// `components[c][l]`.
    pub components: Vec<Vec<WalshVector<T>>>,
}

impl<T: Real> SchemeSolution<T> {
    pub fn at(&self, component: usize, l: usize) -> &WalshVector<T> {
        &self.components[component][l]
    }
}

fn increments<T: Real>(grid: &KernelGrid, l: usize) -> Vec<T> {
    grid.increment_row(l).iter().map(|&d| T::of(d)).collect()
}

/// Iterates the scheme on full Walsh vectors.
///
/// The pathwise scheme is iterated too, with the ordinary product
/// `Ξ_A Ξ_B = Ξ_{AΔB}` in place of the Wick product.
pub fn solve_scheme_exact<T: Real>(grid: &KernelGrid, spec: &SchemeSpec) -> Result<SchemeSolution<T>> {
    let n = grid.n();
    spec.validate_for(n)?;
    let unit = WalshVector::<T>::unit(n)?;
    let mut components = Vec::new();
    match *spec {
        SchemeSpec::Geometric | SchemeSpec::Drift { .. } | SchemeSpec::PathwiseSottinen => {
            let (growth, sigma, s0) = match *spec {
                SchemeSpec::Drift { mu, sigma, s0 } => (1.0 + mu / n as f64, sigma, s0),
                _ => (1.0, 1.0, 1.0),
            };
            let pathwise = matches!(spec, SchemeSpec::PathwiseSottinen);
            let mut steps = vec![unit.scaled(T::of(s0))];
            for l in 1..=n {
                let prev = &steps[l - 1];
                let inc = increments::<T>(grid, l);
                let noise = if pathwise {
                    prev.mul_linear_pointwise(&inc)
                } else {
                    prev.wick_mul_linear(&inc)
                };
                let next = prev.combine(T::of(growth), &noise, T::of(sigma))?;
                steps.push(next);
            }
            components.push(steps);
        }
        SchemeSpec::LinearSystem { .. } | SchemeSpec::SinCos => {
            let [a1, a2, b1, b2, x0, y0] = spec.system().expect("two-component scheme");
            let (a1, a2, b1, b2) = (T::of(a1), T::of(a2), T::of(b1), T::of(b2));
            let mut xs = vec![unit.scaled(T::of(x0))];
            let mut ys = vec![unit.scaled(T::of(y0))];
            for l in 1..=n {
                let inc = increments::<T>(grid, l);
                let fx = xs[l - 1].combine(a1, &ys[l - 1], a2)?.wick_mul_linear(&inc);
                let fy = xs[l - 1].combine(b1, &ys[l - 1], b2)?.wick_mul_linear(&inc);
                let x = xs[l - 1].add(&fx)?;
                let y = ys[l - 1].add(&fy)?;
                xs.push(x);
                ys.push(y);
            }
            components.push(xs);
            components.push(ys);
        }
    }
    Ok(SchemeSolution {
        spec: *spec,
        components,
    })
}

/// `X̂_l = Π_{j≤l}(1 + ΔB_j)` on one path, for `l = 0..=n`.
pub fn sottinen_pathwise<T: Real>(grid: &KernelGrid, path: &Path) -> Result<Vec<T>> {
    let n = grid.n();
    check_dims(n, path.n())?;
    let signs: Vec<f64> = path.signs().iter().map(|&s| f64::from(s)).collect();
    let mut out = Vec::with_capacity(n + 1);
    let mut x = T::one();
    out.push(x);
    for l in 1..=n {
        let db: f64 = grid.increment_row(l).iter().zip(&signs).map(|(d, s)| d * s).sum();
        x *= T::one() + T::of(db);
        out.push(x);
    }
    Ok(out)
}

/// The scheme at time `t` on `path`, with `U^k` replaced by discrete Wick
/// powers: `Σ_k a_{n,k}·e_k(b_{t,i} s_i)` per component. The substitution
/// costs at most `K·n^{1−2H}` in mean square (see [`super::u_difference_norm`]).
pub fn scheme_series_path<T: Real>(
    grid: &KernelGrid,
    spec: &SchemeSpec,
    t: f64,
    path: &Path,
) -> Result<Vec<SeriesEval<T>>> {
    let families = spec.series_for(grid.n(), grid.step_of(t))?;
    let refs: Vec<_> = families.iter().collect();
    let v = signed_weights::<T>(grid, t, path)?;
    series_of_weights(&v, &refs)
}

/// Residual of the discrete Hermite recursion and its mean-square bound.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteResidual<T> {
    pub residual: WalshVector<T>,
    /// `16 c_H⁴ N! N³ n^{−(4−4H)}`.
    pub bound: f64,
}

/// `R = (B_t)^{⋄(N+1)} − [B_t·(B_t)^{⋄N} − N·E[B_t²]·(B_t)^{⋄(N−1)}]`, with
/// the middle product taken pointwise.
pub fn discrete_hermite_residual<T: Real>(grid: &KernelGrid, t: f64, order: usize) -> Result<HermiteResidual<T>> {
    if order == 0 {
        return Err(Error::InvalidArgument("Hermite recursion needs N >= 1".into()));
    }
    let b = random_walk_vector::<T>(grid, t)?;
    let weights = b.as_linear().expect("walk vector is linear");
    let var = b.norm_sq();
    let lower = b.wick_power(order - 1);
    let mid = lower.wick_mul_linear(&weights);
    let upper = mid.wick_mul_linear(&weights);
    let product = mid.mul_linear_pointwise(&weights);
    let recursion = product.combine(T::one(), &lower, -(T::of(order as f64) * var))?;
    let residual = upper.sub(&recursion)?;
    let h = grid.hurst().value();
    let c = molchan_golosov_constant(grid.hurst());
    let bound =
        16.0 * c.powi(4) * factorial::<f64>(order) * (order as f64).powi(3) * (grid.n() as f64).powf(-(4.0 - 4.0 * h));
    Ok(HermiteResidual { residual, bound })
}

/// `N!·Σ_{|C|=N−1} b_{t,C}·(Σ_{i∈C} b_{t,i}²)·Ξ_C`.
pub fn hermite_remainder_closed_form<T: Real>(grid: &KernelGrid, t: f64, order: usize) -> Result<WalshVector<T>> {
    if order == 0 {
        return Err(Error::InvalidArgument("Hermite recursion needs N >= 1".into()));
    }
    let n = grid.n();
    let row: Vec<T> = grid.row_at(t).iter().map(|&b| T::of(b)).collect();
    let nf = factorial::<T>(order);
    let mut coeffs = WalshVector::<T>::zero(n)?.coeffs().to_vec();
    let limit = 1usize << row.len();
    for (mask, c) in coeffs.iter_mut().enumerate().take(limit) {
        if mask.count_ones() as usize != order - 1 {
            continue;
        }
        let (mut prod, mut sq) = (T::one(), T::zero());
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            prod *= row[i];
            sq += row[i] * row[i];
            m &= m - 1;
        }
        *c = nf * prod * sq;
    }
    WalshVector::from_coeffs(n, coeffs)
}
