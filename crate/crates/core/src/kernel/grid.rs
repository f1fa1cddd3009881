use std::sync::OnceLock;

use rayon::prelude::*;

use super::quadrature::{composite_rule, Endpoint, GaussLegendre, Grading};
use super::{inner_integral_from, molchan_golosov_constant, HurstParam, QuadSettings};
use crate::error::{Error, Result};

/// Quadrature settings a grid was built with, stored alongside the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadProfile {
    pub tol: f64,
    pub base_order: usize,
    /// Highest node-doubling level any column needed before it settled.
    pub max_level_used: u32,
    pub grading_ratio: f64,
    pub grading_pieces: usize,
}

/// Triangular coefficient table `b[l][i]` (`1 ≤ i ≤ l ≤ n`) of the disturbed
/// binary random walk, with its increments `d[l][i] = b[l][i] − b[l−1][i]`.
///
/// Row `l` holds the Walsh coefficients of the walk at time `l/n`; entries with
/// `i > l` are zero and not stored. A built grid is immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid {
    hurst: HurstParam,
    n: usize,
    b: Vec<f64>,
    d: Vec<f64>,
    profile: QuadProfile,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridIncrementCheck {
    pub lhs: f64,
    pub bound: f64,
}

impl GridIncrementCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.bound + slack
    }
}

#[inline]
fn row_offset(l: usize) -> usize {
    l * (l - 1) / 2
}

impl KernelGrid {
    /// Assembles a grid from stored rows, recomputing `d` by differencing.
    pub(crate) fn from_b(hurst: HurstParam, n: usize, b: Vec<f64>, profile: QuadProfile) -> Self {
        assert_eq!(b.len(), n * (n + 1) / 2);
        let mut d = b.clone();
        for l in 2..=n {
            let (prev, cur) = (row_offset(l - 1), row_offset(l));
            for i in 0..l - 1 {
                d[cur + i] = b[cur + i] - b[prev + i];
            }
        }
        Self {
            hurst,
            n,
            b,
            d,
            profile,
        }
    }

    pub fn hurst(&self) -> HurstParam {
        self.hurst
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn profile(&self) -> &QuadProfile {
        &self.profile
    }

    pub(crate) fn raw_b(&self) -> &[f64] {
        &self.b
    }

    /// Lattice index `⌊n·t⌋`, clamped to `0..=n`. Products `n·t` within `1e-9`
    /// below an integer round up to it, so decimal times such as `0.29` land on
    /// the intended lattice point.
    pub fn step_of(&self, t: f64) -> usize {
        let x = (t * self.n as f64 + 1e-9).floor();
        if x <= 0.0 {
            0
        } else {
            (x as usize).min(self.n)
        }
    }

    /// `b[l][1..=l]`; empty for `l = 0`.
    pub fn row(&self, l: usize) -> &[f64] {
        assert!(l <= self.n, "row {l} beyond n = {}", self.n);
        if l == 0 {
            return &[];
        }
        &self.b[row_offset(l)..row_offset(l) + l]
    }

    /// `d[l][1..=l]`; empty for `l = 0`.
    pub fn increment_row(&self, l: usize) -> &[f64] {
        assert!(l <= self.n, "row {l} beyond n = {}", self.n);
        if l == 0 {
            return &[];
        }
        &self.d[row_offset(l)..row_offset(l) + l]
    }

    /// Row of Walsh coefficients for time `t`, i.e. `row(⌊n t⌋)`.
    pub fn row_at(&self, t: f64) -> &[f64] {
        self.row(self.step_of(t))
    }

    /// `b[l][i]` with one-based `i`, zero outside the triangle.
    pub fn b(&self, l: usize, i: usize) -> f64 {
        if i == 0 || i > l {
            0.0
        } else {
            self.row(l)[i - 1]
        }
    }

    /// `d[l][i]` with one-based `i`, zero outside the triangle.
    pub fn d(&self, l: usize, i: usize) -> f64 {
        if i == 0 || i > l {
            0.0
        } else {
            self.increment_row(l)[i - 1]
        }
    }

    /// The coefficient bound `2 c_H n^{−(1−H)}`.
    pub fn coefficient_bound(&self) -> f64 {
        2.0 * molchan_golosov_constant(self.hurst) * (self.n as f64).powf(self.hurst.value() - 1.0)
    }

    /// `Σ_i (b[l][i] − b[m][i])²` against `|l/n − m/n|^{2H}`.
    pub fn increment_check(&self, l: usize, m: usize) -> GridIncrementCheck {
        let (hi, lo) = if l >= m { (l, m) } else { (m, l) };
        let top = self.row(hi);
        let bottom = self.row(lo);
        let mut lhs = 0.0;
        for (i, &x) in top.iter().enumerate() {
            let y = bottom.get(i).copied().unwrap_or(0.0);
            lhs += (x - y) * (x - y);
        }
        let bound = ((hi - lo) as f64 / self.n as f64).powf(2.0 * self.hurst.value());
        GridIncrementCheck { lhs, bound }
    }

    /// Checks every stored invariant, allowing errors of relative size `tol`
    /// in each coefficient.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let bound = self.coefficient_bound() * (1.0 + 4.0 * tol);
        for l in 1..=self.n {
            for (idx, (&b, &d)) in self.row(l).iter().zip(self.increment_row(l)).enumerate() {
                let i = idx + 1;
                if !(b >= 0.0) || !b.is_finite() {
                    return Err(Error::InvariantViolation(format!(
                        "b[{l}][{i}] = {b} is not nonnegative"
                    )));
                }
                if d < -4.0 * tol * b {
                    return Err(Error::InvariantViolation(format!("d[{l}][{i}] = {d:e} is negative")));
                }
                if b > bound {
                    return Err(Error::InvariantViolation(format!(
                        "b[{l}][{i}] = {b} exceeds 2 c_H n^(H-1) = {}",
                        self.coefficient_bound()
                    )));
                }
            }
        }
        for l in 1..=self.n {
            for m in 0..l {
                let check = self.increment_check(l, m);
                let slack = 8.0 * tol * (check.bound.sqrt() + tol);
                if !check.holds(slack) {
                    return Err(Error::InvariantViolation(format!(
                        "increment bound fails for rows ({l}, {m}): {} > {}",
                        check.lhs, check.bound
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `E[B_t B_s] = Σ_{i ≤ ⌊n min(t,s)⌋} b[⌊nt⌋][i] · b[⌊ns⌋][i]`.
pub fn discrete_covariance(grid: &KernelGrid, t: f64, s: f64) -> f64 {
    let (lt, ls) = (grid.step_of(t), grid.step_of(s));
    grid.row(lt).iter().zip(grid.row(ls)).map(|(x, y)| x * y).sum()
}

/// Gauss nodes on every lattice segment `[(m−1)/n, m/n]`, with `u^α` folded
/// into the weights.
struct SegmentTable {
    rule: GaussLegendre,
    nodes: Vec<Vec<(f64, f64)>>,
}

impl SegmentTable {
    fn new(order: usize, n: usize, alpha: f64) -> Self {
        let rule = GaussLegendre::new(order);
        let h = 1.0 / n as f64;
        let nodes = (1..=n)
            .map(|m| {
                rule.mapped((m - 1) as f64 * h, m as f64 * h)
                    .map(|(u, w)| (u, w * u.powf(alpha)))
                    .collect()
            })
            .collect();
        Self { rule, nodes }
    }
}

struct ColumnBuilder {
    n: usize,
    alpha: f64,
    scale: f64,
    grading: Grading,
    levels: Vec<OnceLock<SegmentTable>>,
    settings: QuadSettings,
}

impl ColumnBuilder {
    fn table(&self, level: u32) -> &SegmentTable {
        self.levels[level as usize].get_or_init(|| SegmentTable::new(self.settings.order_at(level), self.n, self.alpha))
    }

    /// `b[l][i]` for `l = i..=n` at one quadrature level.
    fn column(&self, i: usize, level: u32) -> Vec<f64> {
        let n = self.n;
        let alpha = self.alpha;
        let table = self.table(level);
        let rule = &table.rule;
        let h = 1.0 / n as f64;
        let (a, c) = ((i - 1) as f64 * h, i as f64 * h);
        let left = if i == 1 {
            Endpoint::Power(-alpha)
        } else {
            Endpoint::Smooth
        };
        let mut out = vec![0.0; n - i + 1];

        // l = i: the outer integrand vanishes like (c − s)^α at the right end.
        let diag = composite_rule(rule, a, c, left, Endpoint::Power(alpha), self.grading);
        out[0] = diag
            .iter()
            .map(|&(s, w)| w * s.powf(-alpha) * inner_integral_from(s, c, alpha, rule))
            .sum();

        if i < n {
            let off = composite_rule(rule, a, c, left, Endpoint::Smooth, self.grading);
            for &(s, w) in &off {
                let weight = w * s.powf(-alpha);
                let mut inner = inner_integral_from(s, (i + 1) as f64 * h, alpha, rule);
                out[1] += weight * inner;
                for m in i + 2..=n {
                    inner += table.nodes[m - 1]
                        .iter()
                        .map(|&(u, wu)| wu * (u - s).powf(alpha - 1.0))
                        .sum::<f64>();
                    out[m - i] += weight * inner;
                }
            }
        }
        for v in &mut out {
            *v *= self.scale;
        }
        out
    }

    fn converged_column(&self, i: usize) -> Result<(Vec<f64>, u32)> {
        let mut coarse = self.column(i, 0);
        let mut change = f64::INFINITY;
        for level in 1..=self.settings.max_level {
            let fine = self.column(i, level);
            change = coarse
                .iter()
                .zip(&fine)
                .map(|(c, f)| (f - c).abs() / f.abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            if change <= self.settings.tol {
                return Ok((fine, level));
            }
            coarse = fine;
        }
        Err(Error::QuadratureNonConvergence {
            context: format!("grid column i = {i} of n = {}", self.n),
            tol: self.settings.tol,
            change,
        })
    }
}

/// Builds the coefficient grid for `(H, n)` with relative per-coefficient
/// tolerance `tol`, then validates every grid invariant.
pub fn build_grid(hurst: HurstParam, n: usize, tol: f64) -> Result<KernelGrid> {
    build_grid_with(hurst, n, &QuadSettings::with_tol(tol))
}

pub fn build_grid_with(hurst: HurstParam, n: usize, settings: &QuadSettings) -> Result<KernelGrid> {
    if n == 0 {
        return Err(Error::InvalidArgument("grid needs n >= 1".into()));
    }
    if !(settings.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be positive, got {}",
            settings.tol
        )));
    }
    let alpha = hurst.alpha();
    let builder = ColumnBuilder {
        n,
        alpha,
        scale: (n as f64).sqrt() * molchan_golosov_constant(hurst) * alpha,
        grading: settings.grading,
        levels: (0..=settings.max_level).map(|_| OnceLock::new()).collect(),
        settings: *settings,
    };
    let columns: Vec<(Vec<f64>, u32)> = (1..=n)
        .into_par_iter()
        .map(|i| builder.converged_column(i))
        .collect::<Result<_>>()?;

    let mut b = vec![0.0; n * (n + 1) / 2];
    let mut max_level_used = 0;
    for (idx, (col, level)) in columns.iter().enumerate() {
        let i = idx + 1;
        max_level_used = max_level_used.max(*level);
        for (k, &v) in col.iter().enumerate() {
            let l = i + k;
            b[row_offset(l) + i - 1] = v;
        }
    }
    let profile = QuadProfile {
        tol: settings.tol,
        base_order: settings.base_order,
        max_level_used,
        grading_ratio: settings.grading.ratio,
        grading_pieces: settings.grading.pieces,
    };
    let grid = KernelGrid::from_b(hurst, n, b, profile);
    grid.validate(settings.tol)?;
    Ok(grid)
}
