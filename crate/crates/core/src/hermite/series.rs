use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Growth certificate `|a_k| ≤ scale · growth^k` for every `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub scale: f64,
    pub growth: f64,
}

impl Certificate {
    /// The plain form `|a_k| ≤ C^k`.
    pub fn geometric(c: f64) -> Self {
        Self { scale: 1.0, growth: c }
    }

    pub fn bound(&self, k: usize) -> f64 {
        self.scale * self.growth.powi(k as i32)
    }
}

type CoeffFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// Coefficients `a_0, a_1, …` of a Wick analytic functional
/// `Σ_k a_k/k! Φ^{⋄k}`, evaluated lazily, with an optional growth certificate
/// that is re-checked on every access.
#[derive(Clone)]
pub struct SeriesCoeffs {
    label: String,
    coeff: CoeffFn,
    certificate: Option<Certificate>,
}

impl fmt::Debug for SeriesCoeffs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeriesCoeffs")
            .field("label", &self.label)
            .field("certificate", &self.certificate)
            .finish()
    }
}

impl SeriesCoeffs {
    pub fn new(
        label: impl Into<String>,
        certificate: Certificate,
        coeff: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            coeff: Arc::new(coeff),
            certificate: Some(certificate),
        }
    }

    /// Coefficients without a certificate; the series evaluators refuse these.
    pub fn uncertified(label: impl Into<String>, coeff: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            coeff: Arc::new(coeff),
            certificate: None,
        }
    }

    /// A finite table padded with zeros; the certificate is fitted to the table.
    pub fn from_table(label: impl Into<String>, table: Vec<f64>) -> Self {
        let scale = table.first().map_or(0.0, |a| a.abs());
        let growth = table
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| (a.abs() / scale.max(1.0)).powf(1.0 / k as f64))
            .fold(1.0, f64::max);
        let cert = Certificate {
            scale: scale.max(1.0),
            growth,
        };
        Self::new(label, cert, move |k| table.get(k).copied().unwrap_or(0.0))
    }

    /// `a_k ≡ 1`: the Wick exponential.
    pub fn exponential() -> Self {
        Self::new("exponential", Certificate::geometric(1.0), |_| 1.0)
    }

    /// `a_k = σ^k`: the Wick exponential of `σ Φ`.
    pub fn scaled_exponential(sigma: f64) -> Self {
        Self::new(
            format!("exponential(sigma={sigma})"),
            Certificate::geometric(sigma.abs()),
            move |k| sigma.powi(k as i32),
        )
    }

    /// `a = (0, 1, 0, …)`: the variable itself.
    pub fn identity() -> Self {
        Self::new(
            "identity",
            Certificate::geometric(1.0),
            |k| if k == 1 { 1.0 } else { 0.0 },
        )
    }

    /// `a_k = N! 1_{k = N}`: the `N`-th Wick power.
    pub fn wick_power(order: usize) -> Self {
        let nf: f64 = crate::scalar::factorial(order);
        Self::new(
            format!("wick_power({order})"),
            Certificate { scale: nf, growth: 1.0 },
            move |k| if k == order { nf } else { 0.0 },
        )
    }

    /// Wick sine, `a = (0, 1, 0, −1, …)`.
    pub fn sine() -> Self {
        Self::new("sin", Certificate::geometric(1.0), |k| match k % 4 {
            1 => 1.0,
            3 => -1.0,
            _ => 0.0,
        })
    }

    /// Wick cosine, `a = (1, 0, −1, 0, …)`.
    pub fn cosine() -> Self {
        Self::new("cos", Certificate::geometric(1.0), |k| match k % 4 {
            0 => 1.0,
            2 => -1.0,
            _ => 0.0,
        })
    }

    /// Multiplies every coefficient (and the certificate scale) by `factor`.
    pub fn times(&self, factor: f64) -> Self {
        let inner = Arc::clone(&self.coeff);
        Self {
            label: format!("{}*{factor}", self.label),
            coeff: Arc::new(move |k| factor * inner(k)),
            certificate: self.certificate.map(|c| Certificate {
                scale: c.scale * factor.abs(),
                growth: c.growth,
            }),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn certificate(&self) -> Option<Certificate> {
        self.certificate
    }

    pub fn require_certificate(&self) -> Result<Certificate> {
        self.certificate.ok_or(Error::MissingCertificate)
    }

    /// `a_k` without the certificate check.
    pub fn raw(&self, k: usize) -> f64 {
        (self.coeff)(k)
    }

    /// `a_k`, checked against the certificate when one is present.
    pub fn get(&self, k: usize) -> Result<f64> {
        let a = (self.coeff)(k);
        if let Some(c) = self.certificate {
            let bound = c.bound(k);
            if a.abs() > bound * (1.0 + 1e-12) {
                return Err(Error::CertificateViolation {
                    label: self.label.clone(),
                    k,
                    value: a.abs(),
                    bound,
                });
            }
        }
        Ok(a)
    }

    /// `a_0..=a_max`, each checked.
    pub fn take(&self, max: usize) -> Result<Vec<f64>> {
        (0..=max).map(|k| self.get(k)).collect()
    }
}
