//! Molchan–Golosov kernel, its normalising constant, and the coefficient grid
//! of the disturbed binary random walk.
//!
//! With `α = H − 1/2` the kernel reads
//! `z(t, s) = c_H · α · s^{−α} · ∫_s^t u^α (u − s)^{α−1} du` for `s ≤ t`.
//! The inner integrand is singular at `u = s`; the substitution
//! `u = s + v^{1/α}` turns it into the bounded integrand
//! `(s + v^{1/α})^α / α` on `[0, (t − s)^α]`.

mod cache;
mod grid;
pub mod quadrature;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use quadrature::{GaussLegendre, Grading};

pub use cache::{load_grid, save_grid, GridCache, CACHE_FORMAT_VERSION};
pub use grid::{build_grid, build_grid_with, discrete_covariance, GridIncrementCheck, KernelGrid, QuadProfile};

/// Hurst index restricted to the long-memory regime `1/2 < H < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct HurstParam(f64);

impl HurstParam {
    pub fn new(h: f64) -> Result<Self> {
        if h.is_finite() && h > 0.5 && h < 1.0 {
            Ok(Self(h))
        } else {
            Err(Error::InvalidHurst(h))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `H − 1/2`, the exponent that appears throughout the kernel.
    #[inline]
    pub fn alpha(self) -> f64 {
        self.0 - 0.5
    }
}

impl std::fmt::Display for HurstParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `c_H = sqrt(2H Γ(3/2 − H) / (Γ(H + 1/2) Γ(2 − 2H)))`.
pub fn molchan_golosov_constant(h: HurstParam) -> f64 {
    gamma_ratio_constant(h.value())
}

/// The same Gamma ratio without the `(1/2, 1)` restriction; at `H = 1/2`
/// every Gamma argument equals one and the ratio is exactly one.
pub(crate) fn gamma_ratio_constant(h: f64) -> f64 {
    (2.0 * h * gamma(1.5 - h) / (gamma(h + 0.5) * gamma(2.0 - 2.0 * h))).sqrt()
}

/// Covariance of fractional Brownian motion, `(|t|^{2H} + |s|^{2H} − |t − s|^{2H}) / 2`.
pub fn fbm_covariance(h: f64, t: f64, s: f64) -> f64 {
    let e = 2.0 * h;
    0.5 * (t.abs().powf(e) + s.abs().powf(e) - (t - s).abs().powf(e))
}

/// Node-doubling settings shared by the kernel evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    /// Gauss–Legendre order at level 0; level `L` uses `base_order · 2^L`.
    pub base_order: usize,
    /// Relative change between consecutive levels accepted as converged.
    pub tol: f64,
    pub max_level: u32,
    pub grading: Grading,
}

impl QuadSettings {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub(crate) fn order_at(&self, level: u32) -> usize {
        self.base_order << level
    }
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            base_order: 12,
            tol: 1e-9,
            max_level: 4,
            grading: Grading::default(),
        }
    }
}

/// `∫_s^upper u^α (u − s)^{α−1} du` for `0 < s < upper`, via the substitution
/// `u = s + v^{1/α}`. The `v` range is split at `s^α` and then doubled
/// geometrically, since `(s + v^{1/α})^α` bends from `≈ s^α` to `≈ v` there.
pub(crate) fn inner_integral_from(s: f64, upper: f64, alpha: f64, rule: &GaussLegendre) -> f64 {
    if upper <= s {
        return 0.0;
    }
    let inv_alpha = 1.0 / alpha;
    let v_max = (upper - s).powf(alpha);
    let knee = s.powf(alpha);
    let f = |v: f64| (s + v.powf(inv_alpha)).powf(alpha);
    let mut total = rule.integrate(0.0, v_max.min(knee), f);
    let mut lo = knee;
    while lo < v_max {
        let hi = (2.0 * lo).min(v_max);
        total += rule.integrate(lo, hi, f);
        lo = hi;
    }
    total * inv_alpha
}

/// Pointwise Molchan–Golosov kernel `z_H(t, s)`.
///
/// Fails for `s ≤ 0` and when node doubling does not settle within
/// `settings.max_level` levels.
pub fn kernel_z(h: HurstParam, t: f64, s: f64, settings: &QuadSettings) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidArgument(format!("kernel_z requires s > 0, got {s}")));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "kernel_z requires t in [0, 1], got {t}"
        )));
    }
    if t <= s {
        return Ok(0.0);
    }
    let alpha = h.alpha();
    let prefactor = molchan_golosov_constant(h) * alpha * s.powf(-alpha);
    let eval = |level: u32| {
        let rule = GaussLegendre::new(settings.order_at(level));
        prefactor * inner_integral_from(s, t, alpha, &rule)
    };
    let mut coarse = eval(0);
    let mut change = f64::INFINITY;
    for level in 1..=settings.max_level {
        let fine = eval(level);
        change = (fine - coarse).abs() / fine.abs().max(f64::MIN_POSITIVE);
        if change <= settings.tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::QuadratureNonConvergence {
        context: format!("kernel_z(H = {h}, t = {t}, s = {s})"),
        tol: settings.tol,
        change,
    })
}
