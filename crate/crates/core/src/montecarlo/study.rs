use std::fmt;
use std::path::PathBuf;

use super::{ks_distance, moment_report, PathSampler};
use crate::error::{Error, Result};
use crate::hermite::{Certificate, LimitSampler, SeriesCoeffs};
use crate::kernel::{
    build_grid, discrete_covariance, fbm_covariance, molchan_golosov_constant, GridCache, HurstParam, KernelGrid,
};
use crate::scalar::factorial;
use crate::schemes::{scheme_series_path, sottinen_pathwise, u_difference_norm, SchemeSpec};
use crate::symfun::{series_of_weights, wick_power_increment_norm, wick_series_path};

/// What is sampled at each `(n, t)`.
#[derive(Debug, Clone)]
pub enum StudyTarget {
    /// First component of a scheme.
    Scheme(SchemeSpec),
    /// `Σ a_k/k!·(B_t)^{⋄k}` with coefficients fixed in `n`.
    Series(SeriesCoeffs),
}

impl StudyTarget {
    pub fn label(&self) -> String {
        match self {
            Self::Scheme(s) => s.name().to_string(),
            Self::Series(c) => c.label().to_string(),
        }
    }
}

/// Parameters of a convergence study.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub hurst: HurstParam,
    pub n_list: Vec<usize>,
    pub target: StudyTarget,
    pub times: Vec<f64>,
    pub paths: usize,
    /// Size of the limit-marginal reference sample (`paths` when `None`).
    pub reference_paths: Option<usize>,
    pub seed: u64,
    /// Quadrature tolerance for the grids.
    pub tol: f64,
    /// Grid cache directory; grids are rebuilt when absent.
    pub cache_dir: Option<PathBuf>,
    /// Largest `N` in the Wick-power inequality checks.
    pub max_order: usize,
    /// Largest `n` at which the exact U-difference check runs.
    pub exact_n_max: usize,
    /// Output columns, a subset of [`StudyRow::COLUMNS`] (all when empty).
    pub columns: Vec<String>,
}

impl StudyConfig {
    pub fn new(hurst: HurstParam, n_list: Vec<usize>, target: StudyTarget) -> Self {
        Self {
            hurst,
            n_list,
            target,
            times: vec![0.25, 0.5, 0.75, 1.0],
            paths: 10_000,
            reference_paths: None,
            seed: 1,
            tol: 1e-9,
            cache_dir: None,
            max_order: 10,
            exact_n_max: 12,
            columns: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.n_list[0] == 0 {
            return Err(Error::InvalidArgument("n_list must be nonempty and positive".into()));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("n_list must be strictly increasing".into()));
        }
        if self.paths < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 paths, got {}",
                self.paths
            )));
        }
        if self.reference_paths.is_some_and(|r| r < 2) {
            return Err(Error::InvalidArgument("reference sample needs at least 2 draws".into()));
        }
        if let Some(t) = self.times.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(Error::InvalidArgument(format!("time {t} outside [0, 1]")));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if let Some(c) = self.columns.iter().find(|c| !StudyRow::COLUMNS.contains(&c.as_str())) {
            return Err(Error::InvalidArgument(format!("unknown output column {c:?}")));
        }
        if let StudyTarget::Scheme(s) = &self.target {
            for &n in &self.n_list {
                s.validate_for(n)?;
            }
        }
        Ok(())
    }

    /// Selected columns in output order.
    pub fn output_columns(&self) -> Vec<&'static str> {
        if self.columns.is_empty() {
            return StudyRow::COLUMNS.to_vec();
        }
        StudyRow::COLUMNS
            .iter()
            .copied()
            .filter(|c| self.columns.iter().any(|s| s == c))
            .collect()
    }
}

/// Outcome of an inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Not applicable or beyond the exact engines.
    Skip,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::Skip => "skip",
        })
    }
}

impl CheckStatus {
    fn of(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    fn and(self, other: Self) -> Self {
        match (self, other) {
            (Self::Fail, _) | (_, Self::Fail) => Self::Fail,
            (Self::Skip, x) | (x, Self::Skip) => x,
            _ => Self::Pass,
        }
    }
}

/// One output cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Status(CheckStatus),
}

/// One `(n, t)` line of the study table.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub n: usize,
    pub t: f64,
    /// `max_s |discrete_covariance(t, s) − R_H(t, s)|` over the study times.
    pub cov_error: f64,
    pub paths: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub variance_std_error: f64,
    /// Exact mean and variance of the sampled variable (NaN when unknown).
    pub exact_mean: f64,
    pub exact_variance: f64,
    pub limit_mean: f64,
    pub limit_variance: f64,
    /// KS distance to the limit marginal (NaN when no limit is available).
    pub ks: f64,
    pub increment_check: CheckStatus,
    pub wick_increment: CheckStatus,
    pub l2_estimate: CheckStatus,
    pub u_rate: CheckStatus,
}

impl StudyRow {
    pub const COLUMNS: [&'static str; 17] = [
        "n",
        "t",
        "cov_error",
        "paths",
        "mean",
        "variance",
        "std_error",
        "variance_std_error",
        "exact_mean",
        "exact_variance",
        "limit_mean",
        "limit_variance",
        "ks",
        "increment_check",
        "wick_increment",
        "l2_estimate",
        "u_rate",
    ];

    pub fn cell(&self, column: &str) -> Option<Cell> {
        Some(match column {
            "n" => Cell::Int(self.n as u64),
            "t" => Cell::Real(self.t),
            "cov_error" => Cell::Real(self.cov_error),
            "paths" => Cell::Int(self.paths as u64),
            "mean" => Cell::Real(self.mean),
            "variance" => Cell::Real(self.variance),
            "std_error" => Cell::Real(self.std_error),
            "variance_std_error" => Cell::Real(self.variance_std_error),
            "exact_mean" => Cell::Real(self.exact_mean),
            "exact_variance" => Cell::Real(self.exact_variance),
            "limit_mean" => Cell::Real(self.limit_mean),
            "limit_variance" => Cell::Real(self.limit_variance),
            "ks" => Cell::Real(self.ks),
            "increment_check" => Cell::Status(self.increment_check),
            "wick_increment" => Cell::Status(self.wick_increment),
            "l2_estimate" => Cell::Status(self.l2_estimate),
            "u_rate" => Cell::Status(self.u_rate),
            _ => return None,
        })
    }

    /// Every check that ran passed.
    pub fn all_pass(&self) -> bool {
        [self.increment_check, self.wick_increment, self.l2_estimate, self.u_rate]
            .iter()
            .all(|s| *s != CheckStatus::Fail)
    }
}

/// Relative slack for rounding in the inequality checks.
const CHECK_SLACK: f64 = 1e-10;

fn obtain_grid(cfg: &StudyConfig, n: usize) -> Result<KernelGrid> {
    match &cfg.cache_dir {
        Some(dir) => GridCache::new(dir).get_or_build(cfg.hurst, n, cfg.tol),
        None => build_grid(cfg.hurst, n, cfg.tol),
    }
}

/// `Σ a_k² e_k(b²)`, the second moment of `Σ a_k e_k(b ξ)`.
fn series_second_moment(grid: &KernelGrid, t: f64, coeffs: &SeriesCoeffs) -> Result<f64> {
    let cert = coeffs.require_certificate()?;
    let sq = Certificate {
        scale: cert.scale * cert.scale,
        growth: cert.growth * cert.growth,
    };
    let inner = coeffs.clone();
    let squared = SeriesCoeffs::new(format!("{}^2", coeffs.label()), sq, move |k| inner.raw(k).powi(2));
    let values: Vec<f64> = grid.row_at(t).iter().map(|b| b * b).collect();
    Ok(series_of_weights(&values, &[&squared])?[0].value)
}

/// `(1/N!)E[(B_t^{⋄N} − B_s^{⋄N})²] ≤ 8^N |⌊nt⌋/n − ⌊ns⌋/n|^{2H}` for all `N`.
fn wick_increment_status(grid: &KernelGrid, t: f64, times: &[f64], max_order: usize) -> Result<CheckStatus> {
    let n = grid.n() as f64;
    let h = grid.hurst().value();
    let mut ok = true;
    for &s in times {
        let gap = ((grid.step_of(t) as f64 - grid.step_of(s) as f64) / n).abs();
        for order in 1..=max_order {
            let lhs = wick_power_increment_norm::<f64>(grid, t, s, order)?;
            let scale = (crate::symfun::wick_power_inner::<f64>(grid, t, t, order)?
                + crate::symfun::wick_power_inner::<f64>(grid, s, s, order)?)
                / factorial::<f64>(order);
            let rhs = 8f64.powi(order as i32) * gap.powf(2.0 * h);
            ok &= lhs <= rhs + CHECK_SLACK * scale;
        }
    }
    Ok(CheckStatus::of(ok))
}

/// `0 ≤ E[B_t²]^N + E[B_s²]^N − 2E[B_tB_s]^N − (1/N!)E[(…)²] ≤ 2c²N²t^{2H(N−1)}n^{−(2−2H)}`
/// for `s ≤ t` and `N ≤ ⌊ns⌋`.
fn l2_estimate_status(grid: &KernelGrid, t: f64, times: &[f64], max_order: usize) -> Result<CheckStatus> {
    let n = grid.n();
    let h = grid.hurst().value();
    let c = molchan_golosov_constant(grid.hurst());
    let mut status = CheckStatus::Skip;
    for &s0 in times {
        let (hi, lo) = if s0 <= t { (t, s0) } else { (s0, t) };
        let top = max_order.min(grid.step_of(lo));
        for order in 1..=top {
            let nn = order as i32;
            let vt = discrete_covariance(grid, hi, hi);
            let vs = discrete_covariance(grid, lo, lo);
            let cts = discrete_covariance(grid, hi, lo);
            let diff = wick_power_increment_norm::<f64>(grid, hi, lo, order)?;
            let defect = vt.powi(nn) + vs.powi(nn) - 2.0 * cts.powi(nn) - diff;
            let size = vt.powi(nn) + vs.powi(nn);
            let upper = 2.0
                * c
                * c
                * (order * order) as f64
                * hi.powf(2.0 * h * (order - 1) as f64)
                * (n as f64).powf(-(2.0 - 2.0 * h));
            let slack = CHECK_SLACK * size;
            status = status.and(CheckStatus::of(defect >= -slack && defect <= upper + slack));
        }
    }
    Ok(status)
}

fn target_series(target: &StudyTarget, grid: &KernelGrid, t: f64) -> Result<Option<SeriesCoeffs>> {
    Ok(match target {
        StudyTarget::Scheme(SchemeSpec::PathwiseSottinen) => None,
        StudyTarget::Scheme(s) => Some(s.series_for(grid.n(), grid.step_of(t))?.remove(0)),
        StudyTarget::Series(c) => Some(c.clone()),
    })
}

fn limit_series(target: &StudyTarget, hurst: HurstParam, t: f64) -> Result<SeriesCoeffs> {
    match target {
        StudyTarget::Scheme(s) => Ok(s.limit_series(hurst.value(), t)?.remove(0)),
        StudyTarget::Series(c) => Ok(c.clone()),
    }
}

fn study_row(cfg: &StudyConfig, grid: &KernelGrid, t: f64) -> Result<StudyRow> {
    let n = grid.n();
    let h = cfg.hurst;
    let cov_error = cfg
        .times
        .iter()
        .map(|&s| (discrete_covariance(grid, t, s) - fbm_covariance(h.value(), t, s)).abs())
        .fold(0.0, f64::max);

    let sampler = PathSampler::new(n, cfg.seed);
    let samples: Vec<f64> = match &cfg.target {
        StudyTarget::Scheme(SchemeSpec::PathwiseSottinen) => {
            let l = grid.step_of(t);
            sampler.map(cfg.paths, |p| Ok(sottinen_pathwise::<f64>(grid, p)?[l]))?
        }
        StudyTarget::Scheme(spec) => {
            sampler.map(cfg.paths, |p| Ok(scheme_series_path::<f64>(grid, spec, t, p)?[0].value))?
        }
        StudyTarget::Series(c) => sampler.map(cfg.paths, |p| wick_series_path::<f64>(grid, t, c, p))?,
    };
    let moments = moment_report(&samples)?;

    let series = target_series(&cfg.target, grid, t)?;
    let (exact_mean, exact_variance) = match &series {
        Some(c) => {
            let a0 = c.get(0)?;
            (a0, series_second_moment(grid, t, c)? - a0 * a0)
        }
        None => (f64::NAN, f64::NAN),
    };

    let (limit_mean, limit_variance, ks) = if t > 0.0 {
        let lim = LimitSampler::new(limit_series(&cfg.target, h, t)?, h, t, cfg.seed)?;
        let reference = lim.samples(cfg.reference_paths.unwrap_or(cfg.paths))?;
        let lm = moment_report(&reference)?;
        (lm.mean, lm.variance, ks_distance(&samples, &reference)?)
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };

    let l = grid.step_of(t);
    let increment_check = CheckStatus::of(cfg.times.iter().all(|&s| {
        let chk = grid.increment_check(l, grid.step_of(s));
        chk.holds(8.0 * cfg.tol * (chk.bound.sqrt() + cfg.tol))
    }));
    let wick_increment = wick_increment_status(grid, t, &cfg.times, cfg.max_order)?;
    let l2_estimate = l2_estimate_status(grid, t, &cfg.times, cfg.max_order)?;
    let u_rate = match &series {
        Some(c) if n <= cfg.exact_n_max => {
            let d = u_difference_norm(grid, c, t)?;
            CheckStatus::of(d.value <= d.bound)
        }
        _ => CheckStatus::Skip,
    };

    Ok(StudyRow {
        n,
        t,
        cov_error,
        paths: cfg.paths,
        mean: moments.mean,
        variance: moments.variance,
        std_error: moments.std_error,
        variance_std_error: moments.variance_std_error,
        exact_mean,
        exact_variance,
        limit_mean,
        limit_variance,
        ks,
        increment_check,
        wick_increment,
        l2_estimate,
        u_rate,
    })
}

/// Rows for every `(n, t)` in `n_list × times`, in that order.
pub fn run_study(cfg: &StudyConfig) -> Result<Vec<StudyRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    if cfg.times.is_empty() {
        return Ok(rows);
    }
    for &n in &cfg.n_list {
        let grid = obtain_grid(cfg, n)?;
        for &t in &cfg.times {
            rows.push(study_row(cfg, &grid, t)?);
        }
    }
    Ok(rows)
}
