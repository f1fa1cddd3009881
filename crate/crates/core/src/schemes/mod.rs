//! Wick difference equations driven by the disturbed random walk, their
//! closed-form solutions, and the pathwise (ordinary product) alternative.

mod solve;
mod urec;

pub use solve::{
    discrete_hermite_residual, hermite_remainder_closed_form, scheme_series_path, solve_scheme_exact,
    sottinen_pathwise, HermiteResidual, SchemeSolution,
};
pub use urec::{rate_constant, u_difference_norm, u_step, UDifference, URecursionState, DEFAULT_SUPPORT_CAP};

use crate::error::{Error, Result};
use crate::hermite::{Certificate, SeriesCoeffs};

/// Default grade cap for the U recursion.
pub const DEFAULT_MAX_ORDER: usize = 8;

/// A scheme and its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeSpec {
    /// `S_l = S_{l−1} + S_{l−1} ⋄ ΔB_l`, `S_0 = 1`.
    Geometric,
    /// `S_l = (1 + μ/n) S_{l−1} + σ S_{l−1} ⋄ ΔB_l`, `S_0 = s0`.
    Drift { mu: f64, sigma: f64, s0: f64 },
    /// `X_l = X_{l−1} + (A1 X + A2 Y)_{l−1} ⋄ ΔB_l`, `Y_l = Y_{l−1} + (B1 X + B2 Y)_{l−1} ⋄ ΔB_l`.
    LinearSystem {
        a1: f64,
        a2: f64,
        b1: f64,
        b2: f64,
        x0: f64,
        y0: f64,
    },
    /// The linear system with `A2 = 1`, `B1 = −1`, others zero, `(x0, y0) = (0, 1)`.
    SinCos,
    /// `X̂_l = X̂_{l−1}(1 + ΔB_l)` with the ordinary product.
    PathwiseSottinen,
}

impl SchemeSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Geometric => "geometric",
            Self::Drift { .. } => "drift",
            Self::LinearSystem { .. } => "linear_system",
            Self::SinCos => "sin_cos",
            Self::PathwiseSottinen => "pathwise_sottinen",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Drift { mu, sigma, s0 } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "drift scheme needs sigma > 0, got {sigma}"
                    )));
                }
                if !mu.is_finite() || !s0.is_finite() {
                    return Err(Error::InvalidArgument("drift parameters must be finite".into()));
                }
            }
            Self::LinearSystem { a1, a2, b1, b2, x0, y0 }
                if [a1, a2, b1, b2, x0, y0].iter().any(|v| !v.is_finite()) =>
            {
                return Err(Error::InvalidArgument("linear system parameters must be finite".into()));
            }
            _ => {}
        }
        Ok(())
    }

    /// Checks the scheme is well defined at resolution `n`.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        self.validate()?;
        if let Self::Drift { mu, .. } = *self {
            if 1.0 + mu / n as f64 <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "1 + mu/n must be positive (mu = {mu}, n = {n})"
                )));
            }
        }
        Ok(())
    }

    /// Number of coupled components (2 for the systems, else 1).
    pub fn components(&self) -> usize {
        match self {
            Self::LinearSystem { .. } | Self::SinCos => 2,
            _ => 1,
        }
    }

    /// `(A1, A2, B1, B2, x0, y0)` for the two-component schemes.
    pub fn system(&self) -> Option<[f64; 6]> {
        match *self {
            Self::LinearSystem { a1, a2, b1, b2, x0, y0 } => Some([a1, a2, b1, b2, x0, y0]),
            Self::SinCos => Some([0.0, 1.0, -1.0, 0.0, 0.0, 1.0]),
            _ => None,
        }
    }

    /// `M_AB = 2 max(|A1|, |A2|, |B1|, |B2|)`.
    pub fn m_ab(&self) -> Option<f64> {
        self.system()
            .map(|[a1, a2, b1, b2, ..]| 2.0 * a1.abs().max(a2.abs()).max(b1.abs()).max(b2.abs()))
    }

    /// Coefficient sequences `(a_k)`, `(b_k)` of the linear-system solution,
    /// certified by `|a_k|, |b_k| ≤ max(|x0|, |y0|)·M_AB^k`.
    pub fn system_coeffs(&self) -> Option<(SeriesCoeffs, SeriesCoeffs)> {
        let [a1, a2, b1, b2, x0, y0] = self.system()?;
        let cert = Certificate {
            scale: x0.abs().max(y0.abs()),
            growth: self.m_ab()?,
        };
        let nth = move |k: usize| {
            let (mut a, mut b) = (x0, y0);
            for _ in 0..k {
                (a, b) = (a1 * a + a2 * b, b1 * a + b2 * b);
            }
            (a, b)
        };
        let (label_a, label_b) = match self {
            Self::SinCos => ("sin".to_string(), "cos".to_string()),
            _ => ("system_x".to_string(), "system_y".to_string()),
        };
        Some((
            SeriesCoeffs::new(label_a, cert, move |k| nth(k).0),
            SeriesCoeffs::new(label_b, cert, move |k| nth(k).1),
        ))
    }

    /// Coefficients `a_{n,k}` with `S_l = Σ_k a_{n,k}/k!·U^k_l` (and the
    /// Wick-power substitute), one family per component, at step `l`.
    pub fn series_for(&self, n: usize, l: usize) -> Result<Vec<SeriesCoeffs>> {
        self.validate_for(n)?;
        match *self {
            Self::Geometric => Ok(vec![SeriesCoeffs::exponential()]),
            Self::Drift { mu, sigma, s0 } => {
                let growth = 1.0 + mu / n as f64;
                let w = s0 * growth.powi(l as i32);
                Ok(vec![SeriesCoeffs::scaled_exponential(sigma / growth).times(w)])
            }
            Self::LinearSystem { .. } | Self::SinCos => {
                let (a, b) = self.system_coeffs().expect("two-component scheme");
                Ok(vec![a, b])
            }
            Self::PathwiseSottinen => Err(Error::InvalidArgument(
                "the pathwise scheme has no Wick series representation".into(),
            )),
        }
    }

    /// Wick-series coefficients of the continuous-time limit at time `t`.
    ///
    /// The pathwise scheme tends to the ordinary exponential
    /// `exp(B_t) = e^{t^{2H}/2} exp^⋄(B_t)`.
    pub fn limit_series(&self, hurst: f64, t: f64) -> Result<Vec<SeriesCoeffs>> {
        self.validate()?;
        match *self {
            Self::Drift { mu, sigma, s0 } => {
                Ok(vec![SeriesCoeffs::scaled_exponential(sigma).times(s0 * (mu * t).exp())])
            }
            Self::PathwiseSottinen => Ok(vec![
                SeriesCoeffs::exponential().times((0.5 * t.powf(2.0 * hurst)).exp())
            ]),
            _ => self.series_for(1, 0),
        }
    }
}
