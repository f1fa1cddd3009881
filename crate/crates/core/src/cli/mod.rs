//! The `wickfbm` command-line frontend.

mod config;
mod output;
mod selftest;

pub use config::{CliConfig, OutputFormat, Settings, CONFIG_KEYS};
pub use output::{Table, Value, SCHEMA_VERSION};
pub use selftest::{run_selftest, SuiteResult};

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::kernel::{build_grid, GridCache, KernelGrid};
use crate::montecarlo::{run_study, PathSampler, StudyConfig, StudyTarget};
use crate::schemes::{scheme_series_path, sottinen_pathwise, u_difference_norm, SchemeSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_QUADRATURE: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;

/// Cache directory used by `grid` when `--cache-dir` is absent.
pub const DEFAULT_CACHE_DIR: &str = "wickfbm-cache";

#[derive(Debug, Parser)]
#[command(
    name = "wickfbm",
    version,
    about = "Discrete Wick calculus for fractional Brownian motion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build (or load) the kernel grid for `n` and print its summary.
    Grid,
    /// Run the small-n invariant suites.
    Selftest,
    /// Per-path scheme values at the requested times.
    Simulate,
    /// Convergence study over `n_list`.
    Converge,
    /// Exact U-difference norms over `n_list` with a fitted log-log slope.
    Rate,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// key=value configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for cached kernel grids.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    hurst: Option<String>,
    #[arg(long, global = true)]
    n: Option<String>,
    /// Comma-separated, strictly increasing.
    #[arg(long = "n-list", global = true)]
    n_list: Option<String>,
    /// geometric | drift | linear_system | sin_cos | pathwise_sottinen
    #[arg(long, global = true)]
    scheme: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    mu: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    sigma: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    s0: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    a1: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    a2: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    b1: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    b2: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    y0: Option<String>,
    #[arg(long, global = true)]
    paths: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Comma-separated times in [0, 1].
    #[arg(long, global = true)]
    times: Option<String>,
    /// Quadrature tolerance for grid construction.
    #[arg(long, global = true)]
    tol: Option<String>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<String>,
    /// csv | json
    #[arg(long, global = true)]
    format: Option<String>,
}

impl CommonArgs {
    fn settings(&self) -> Result<Settings> {
        let mut s = Settings::default();
        let pairs = [
            ("hurst", &self.hurst),
            ("n", &self.n),
            ("n_list", &self.n_list),
            ("scheme", &self.scheme),
            ("mu", &self.mu),
            ("sigma", &self.sigma),
            ("s0", &self.s0),
            ("a1", &self.a1),
            ("a2", &self.a2),
            ("b1", &self.b1),
            ("b2", &self.b2),
            ("x0", &self.x0),
            ("y0", &self.y0),
            ("paths", &self.paths),
            ("seed", &self.seed),
            ("times", &self.times),
            ("tol", &self.tol),
            ("out", &self.out),
            ("format", &self.format),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                s.set(key, v.clone())?;
            }
        }
        Ok(s)
    }
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::QuadratureNonConvergence { .. } => EXIT_QUADRATURE,
        Error::Capacity(_) => EXIT_CAPACITY,
        Error::InvariantViolation(_) | Error::CertificateViolation { .. } => EXIT_CHECK_FAILED,
        _ => EXIT_VALIDATION,
    }
}

/// A command's table and whether any of its checks failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub failed: bool,
}

fn grid_for(cfg: &CliConfig, n: usize) -> Result<KernelGrid> {
    match &cfg.cache_dir {
        Some(dir) => GridCache::new(dir).get_or_build(cfg.hurst, n, cfg.tol),
        None => build_grid(cfg.hurst, n, cfg.tol),
    }
}

pub fn cmd_grid(cfg: &CliConfig) -> Result<Outcome> {
    let dir = cfg
        .cache_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR));
    let cache = GridCache::new(&dir);
    let grid = cache.get_or_build(cfg.hurst, cfg.n, cfg.tol)?;
    let n = grid.n();
    let max_b = (1..=n).flat_map(|l| grid.row(l).iter().copied()).fold(0.0, f64::max);
    let last_sq: f64 = grid.row(n).iter().map(|b| b * b).sum();
    let mut table = Table::new(
        "grid",
        &[
            "hurst",
            "n",
            "tol",
            "max_level_used",
            "coefficient_bound",
            "max_b",
            "variance_at_1",
            "cache_file",
        ],
    );
    table.push(vec![
        Value::Real(grid.hurst().value()),
        Value::Int(n as u64),
        Value::Real(grid.profile().tol),
        Value::Int(grid.profile().max_level_used as u64),
        Value::Real(grid.coefficient_bound()),
        Value::Real(max_b),
        Value::Real(last_sq),
        Value::Text(cache.path_for(cfg.hurst, cfg.n, cfg.tol).display().to_string()),
    ]);
    Ok(Outcome {
        table,
        failed: max_b > grid.coefficient_bound() * (1.0 + 4.0 * cfg.tol),
    })
}

pub fn cmd_selftest(cfg: &CliConfig) -> Result<Outcome> {
    let results = run_selftest(cfg.seed, cfg.tol)?;
    let mut table = Table::new("selftest", &["suite", "n", "cases", "worst", "tolerance", "status"]);
    let mut failed = false;
    for r in &results {
        failed |= !r.pass;
        table.push(vec![
            Value::Text(r.suite.into()),
            Value::Int(r.n as u64),
            Value::Int(r.cases as u64),
            Value::Real(r.worst),
            Value::Real(r.tolerance),
            Value::Text(if r.pass { "pass" } else { "fail" }.into()),
        ]);
    }
    Ok(Outcome { table, failed })
}

pub fn cmd_simulate(cfg: &CliConfig) -> Result<Outcome> {
    let grid = grid_for(cfg, cfg.n)?;
    cfg.scheme.validate_for(cfg.n)?;
    let sampler = PathSampler::new(cfg.n, cfg.seed);
    let spec = cfg.scheme;
    let times = cfg.times.clone();
    let per_path: Vec<Vec<(f64, f64)>> = sampler.map(cfg.paths, |p| {
        if spec == SchemeSpec::PathwiseSottinen {
            let xs = sottinen_pathwise::<f64>(&grid, p)?;
            Ok(times.iter().map(|&t| (xs[grid.step_of(t)], f64::NAN)).collect())
        } else {
            times
                .iter()
                .map(|&t| {
                    let v = scheme_series_path::<f64>(&grid, &spec, t, p)?;
                    Ok((v[0].value, v.get(1).map_or(f64::NAN, |e| e.value)))
                })
                .collect()
        }
    })?;
    let mut table = Table::new("simulate", &["path", "t", "value", "value_y"]);
    for (i, row) in per_path.iter().enumerate() {
        for (&t, &(x, y)) in cfg.times.iter().zip(row) {
            table.push(vec![
                Value::Int(i as u64),
                Value::Real(t),
                Value::Real(x),
                Value::Real(y),
            ]);
        }
    }
    Ok(Outcome { table, failed: false })
}

pub fn cmd_converge(cfg: &CliConfig) -> Result<Outcome> {
    let mut study = StudyConfig::new(cfg.hurst, cfg.n_list.clone(), StudyTarget::Scheme(cfg.scheme));
    study.times = cfg.times.clone();
    study.paths = cfg.paths;
    study.seed = cfg.seed;
    study.tol = cfg.tol;
    study.cache_dir = cfg.cache_dir.clone();
    let rows = run_study(&study)?;
    let columns = study.output_columns();
    let mut table = Table::new("converge", &columns);
    let mut failed = false;
    for r in &rows {
        failed |= !r.all_pass();
        table.push(
            columns
                .iter()
                .map(|c| r.cell(c).expect("known column").into())
                .collect(),
        );
    }
    Ok(Outcome { table, failed })
}

/// Least-squares slope of `ln y` against `ln x`; NaN with fewer than two points.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Slack on top of `1 − 2H` allowed for the fitted slope.
pub const RATE_SLOPE_SLACK: f64 = 0.3;

pub fn cmd_rate(cfg: &CliConfig) -> Result<Outcome> {
    let h = cfg.hurst.value();
    let limit = 1.0 - 2.0 * h + RATE_SLOPE_SLACK;
    let mut table = Table::new(
        "rate",
        &[
            "component",
            "n",
            "t",
            "value",
            "bound",
            "constant",
            "slope",
            "slope_limit",
            "status",
        ],
    );
    let grids: Vec<KernelGrid> = cfg.n_list.iter().map(|&n| grid_for(cfg, n)).collect::<Result<_>>()?;
    let mut failed = false;
    for &t in &cfg.times {
        for component in 0..cfg.scheme.components() {
            let mut diffs = Vec::new();
            for grid in &grids {
                let coeffs = cfg.scheme.series_for(grid.n(), grid.step_of(t))?.swap_remove(component);
                diffs.push((grid.n(), u_difference_norm(grid, &coeffs, t)?));
            }
            let slope = log_log_slope(&diffs.iter().map(|(n, d)| (*n as f64, d.value)).collect::<Vec<_>>());
            for (n, d) in diffs {
                let ok = d.value <= d.bound && !(slope > limit);
                failed |= !ok;
                table.push(vec![
                    Value::Int(component as u64),
                    Value::Int(n as u64),
                    Value::Real(t),
                    Value::Real(d.value),
                    Value::Real(d.bound),
                    Value::Real(d.constant),
                    Value::Real(slope),
                    Value::Real(limit),
                    Value::Text(if ok { "pass" } else { "fail" }.into()),
                ]);
            }
        }
    }
    Ok(Outcome { table, failed })
}

fn execute(cli: &Cli) -> Result<(Outcome, CliConfig)> {
    let flags = cli.common.settings()?;
    let base = match &cli.common.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let cfg = CliConfig::from_settings(&base.overridden_by(&flags), cli.common.cache_dir.clone())?;
    let outcome = match cli.command {
        Command::Grid => cmd_grid(&cfg)?,
        Command::Selftest => cmd_selftest(&cfg)?,
        Command::Simulate => cmd_simulate(&cfg)?,
        Command::Converge => cmd_converge(&cfg)?,
        Command::Rate => cmd_rate(&cfg)?,
    };
    Ok((outcome, cfg))
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok((outcome, cfg)) => {
            if let Err(e) = outcome.table.emit(cfg.format, cfg.out.as_deref()) {
                eprintln!("error: {e}");
                return exit_code(&e);
            }
            if outcome.failed {
                eprintln!("error: one or more checks failed");
                EXIT_CHECK_FAILED
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
