//! Hermite polynomials with variance parameter, Wick functionals of a single
//! Gaussian, and samplers for the limit marginals.

mod series;

pub use series::{Certificate, SeriesCoeffs};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::HurstParam;
use crate::scalar::Real;
use crate::stream::standard_normal;

/// `h^N_{σ²}(x)` by `h^{k+1} = x h^k − k σ² h^{k−1}`.
pub fn hermite_poly<T: Real>(order: usize, sigma2: T, x: T) -> T {
    let mut prev = T::one();
    if order == 0 {
        return prev;
    }
    let mut cur = x;
    for k in 1..order {
        let next = x * cur - T::of(k as f64) * sigma2 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `h^0..=h^N` at `x`.
pub fn hermite_table<T: Real>(order: usize, sigma2: T, x: T) -> Vec<T> {
    let mut out = Vec::with_capacity(order + 1);
    out.push(T::one());
    if order >= 1 {
        out.push(x);
    }
    for k in 1..order {
        let next = x * out[k] - T::of(k as f64) * sigma2 * out[k - 1];
        out.push(next);
    }
    out
}

/// Cramér's constant in `|He_k(y)| ≤ κ √(k!) e^{y²/4}`.
const CRAMER: f64 = 1.086_435;

/// Orders tried before giving up on a tail tolerance.
pub const MAX_TRUNCATION: usize = 4096;

/// Value of a truncated Wick functional with its remainder bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WickFunctionalValue<T> {
    pub value: T,
    pub order: usize,
    /// `L²(N(0,σ²))` norm bound of the omitted orders.
    pub l2_tail: f64,
    /// Bound on the omitted orders at this particular `x`.
    pub pointwise_tail: f64,
}

/// `Σ_{k≤K} a_k/k!·h^k_{σ²}(x)`, where `K` is the first order at which both
/// the `L²` tail `(Σ_{k>K} (scale·g^k)² σ^{2k}/k!)^{1/2}` and the pointwise
/// tail are below `tol` (the latter relative to `max(1, |value|)`).
pub fn gaussian_wick_functional<T: Real>(
    coeffs: &SeriesCoeffs,
    sigma2: f64,
    x: f64,
    tol: f64,
) -> Result<WickFunctionalValue<T>> {
    if !(sigma2 >= 0.0) || !sigma2.is_finite() || !x.is_finite() {
        return Err(Error::InvalidArgument(format!("sigma2 = {sigma2}, x = {x}")));
    }
    if !(tol > 0.0) {
        return Err(Error::UnreachableTail(tol));
    }
    let cert = coeffs.require_certificate()?;
    let sigma = sigma2.sqrt();
    let y = cert.growth * sigma;
    // pointwise: |a_k h^k/k!| ≤ scale·κ e^{x²/(4σ²)} y^k/√k!  (σ > 0)
    //            |a_k x^k/k!| ≤ scale·(g|x|)^k/k!            (σ = 0)
    let (point_pref, point_ratio_base, point_sqrt) = if sigma > 0.0 {
        (cert.scale * CRAMER * (x * x / (4.0 * sigma2)).exp(), y, true)
    } else {
        (cert.scale, cert.growth * x.abs(), false)
    };

    // r_k = h^k/k!
    let (sig2_t, x_t) = (T::of(sigma2), T::of(x));
    let mut r_prev = T::zero();
    let mut r = T::one();
    let mut sum = T::of(coeffs.get(0)?);
    let mut comp = T::zero();
    // l2_term = (scale y^k)²/k!, point_term = pref·base^k/√k! (or /k!)
    let mut l2_term = cert.scale * cert.scale;
    let mut point_term = point_pref;
    for k in 0..MAX_TRUNCATION {
        let ratio_l2 = y * y / (k + 1) as f64;
        let l2_next = l2_term * ratio_l2;
        let ratio_pt = if point_sqrt {
            point_ratio_base / ((k + 1) as f64).sqrt()
        } else {
            point_ratio_base / (k + 1) as f64
        };
        let point_next = point_term * ratio_pt;
        let denom_l2 = 1.0 - y * y / (k + 2) as f64;
        let denom_pt = if point_sqrt {
            1.0 - point_ratio_base / ((k + 2) as f64).sqrt()
        } else {
            1.0 - point_ratio_base / (k + 2) as f64
        };
        if denom_l2 > 0.0 && denom_pt > 0.0 {
            let l2_tail = (l2_next / denom_l2).sqrt();
            let pointwise_tail = point_next / denom_pt;
            let scale = sum.to_f64_lossy().abs().max(1.0);
            if l2_tail <= tol && pointwise_tail <= tol * scale {
                return Ok(WickFunctionalValue {
                    value: sum + comp,
                    order: k,
                    l2_tail,
                    pointwise_tail,
                });
            }
        }
        l2_term = l2_next;
        point_term = point_next;
        // advance r to order k+1
        let kp1 = T::of((k + 1) as f64);
        let r_next = (x_t * r - sig2_t * r_prev) / kp1;
        r_prev = r;
        r = r_next;
        let a = T::of(coeffs.get(k + 1)?);
        let (s, e) = crate::scalar::two_sum(sum, a * r);
        sum = s;
        comp += e;
    }
    Err(Error::UnreachableTail(tol))
}

/// Absolute tolerance used by the limit samplers.
pub const SAMPLER_TOL: f64 = 1e-12;

/// Draws from the marginal law of `Σ_k a_k/k!·(B^H_t)^{⋄k}`, namely the
/// functional above at `σ² = t^{2H}` and `x ~ N(0, t^{2H})`.
#[derive(Debug, Clone)]
pub struct LimitSampler {
    coeffs: SeriesCoeffs,
    sigma2: f64,
    seed: u64,
    stream: u64,
}

impl LimitSampler {
    pub fn new(coeffs: SeriesCoeffs, hurst: HurstParam, t: f64, seed: u64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidArgument(format!("time {t} outside (0, 1]")));
        }
        coeffs.require_certificate()?;
        Ok(Self {
            coeffs,
            sigma2: t.powf(2.0 * hurst.value()),
            seed,
            stream: 0,
        })
    }

    /// Uses an independent Gaussian stream.
    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// The Gaussian input of sample `j`.
    pub fn gaussian(&self, j: u64) -> f64 {
        self.sigma2.sqrt() * standard_normal(self.seed, self.stream, j)
    }

    pub fn sample(&self, j: u64) -> Result<f64> {
        Ok(gaussian_wick_functional::<f64>(&self.coeffs, self.sigma2, self.gaussian(j), SAMPLER_TOL)?.value)
    }

    pub fn samples(&self, count: usize) -> Result<Vec<f64>> {
        (0..count as u64).into_par_iter().map(|j| self.sample(j)).collect()
    }
}

/// `count` seeded samples of the limit marginal at time `t`.
pub fn limit_marginal_sampler(
    coeffs: &SeriesCoeffs,
    hurst: HurstParam,
    t: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    LimitSampler::new(coeffs.clone(), hurst, t, seed)?.samples(count)
}
