use crate::error::{Error, Result};
use crate::scalar::pairwise_sum;

/// Sample moments with standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Standard error of the mean, `sqrt(variance / count)`.
    pub std_error: f64,
    /// Standard error of the variance, `sqrt((m4 − variance²) / count)`
    /// with `m4` the fourth central sample moment.
    pub variance_std_error: f64,
}

/// Moments of `values`, reduced pairwise in index order.
pub fn moment_report(values: &[f64]) -> Result<MomentReport> {
    let count = values.len();
    if count < 2 {
        return Err(Error::Degenerate(format!(
            "moments need at least 2 values, got {count}"
        )));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Degenerate(format!("non-finite sample value {bad}")));
    }
    let nf = count as f64;
    let mean = pairwise_sum(values) / nf;
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let variance = pairwise_sum(&sq) / (nf - 1.0);
    let quart: Vec<f64> = sq.iter().map(|s| s * s).collect();
    let m4 = pairwise_sum(&quart) / nf;
    Ok(MomentReport {
        count,
        mean,
        variance,
        std_error: (variance / nf).sqrt(),
        variance_std_error: ((m4 - variance * variance).max(0.0) / nf).sqrt(),
    })
}

fn sorted(sample: &[f64], which: &str) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::InvalidArgument(format!("{which} sample is empty")));
    }
    if sample.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument(format!("{which} sample contains NaN")));
    }
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// Two-sample Kolmogorov–Smirnov statistic `sup_x |F_a(x) − F_b(x)|`.
pub fn ks_distance(sample_a: &[f64], sample_b: &[f64]) -> Result<f64> {
    let a = sorted(sample_a, "first")?;
    let b = sorted(sample_b, "second")?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best = 0.0f64;
    while i < a.len() && j < b.len() {
        // step past every copy of the smaller value in both samples
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(best)
}
