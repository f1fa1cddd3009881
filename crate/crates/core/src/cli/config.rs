use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::kernel::HurstParam;
use crate::schemes::SchemeSpec;

/// Keys accepted in a config file.
pub const CONFIG_KEYS: [&str; 19] = [
    "hurst", "n", "n_list", "scheme", "mu", "sigma", "s0", "a1", "a2", "b1", "b2", "x0", "y0", "paths", "seed",
    "times", "tol", "out", "format",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Raw `key → value` settings from a file or from flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<&'static str, String>,
}

impl Settings {
    fn known(key: &str) -> Result<&'static str> {
        CONFIG_KEYS
            .iter()
            .copied()
            .find(|k| *k == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown key {key:?}")))
    }

    /// Sets `key`, rejecting unknown keys.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        self.values.insert(Self::known(key)?, value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_file_text(text: &str) -> Result<Self> {
        let mut s = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |e: Error| {
                let msg = match e {
                    Error::InvalidArgument(m) => m,
                    other => other.to_string(),
                };
                Error::InvalidArgument(format!("config line {}: {msg}", idx + 1))
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(Error::InvalidArgument("expected key=value".into())))?;
            let key = Self::known(key.trim()).map_err(at)?;
            if s.values.contains_key(key) {
                return Err(at(Error::InvalidArgument(format!("duplicate key {key:?}"))));
            }
            s.values.insert(key, value.trim().to_string());
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse_file_text(&fs::read_to_string(path)?)
    }

    /// `self` with every key set in `over` replaced.
    pub fn overridden_by(mut self, over: &Settings) -> Self {
        for (k, v) in &over.values {
            self.values.insert(k, v.clone());
        }
        self
    }
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub hurst: HurstParam,
    pub n: usize,
    pub n_list: Vec<usize>,
    pub scheme: SchemeSpec,
    pub paths: usize,
    pub seed: u64,
    pub times: Vec<f64>,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub cache_dir: Option<PathBuf>,
}

fn num<T: std::str::FromStr>(key: &str, value: Option<&str>, default: T) -> Result<T> {
    match value {
        None => Ok(default),
        Some(v) => v
            .parse::<T>()
            .map_err(|_| Error::InvalidArgument(format!("{key}: cannot parse {v:?}"))),
    }
}

fn finite(key: &str, value: Option<&str>, default: f64) -> Result<f64> {
    let v = num(key, value, default)?;
    if !v.is_finite() {
        return Err(Error::InvalidArgument(format!("{key} must be finite, got {v}")));
    }
    Ok(v)
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| Error::InvalidArgument(format!("{key}: cannot parse {p:?}")))
        })
        .collect()
}

impl CliConfig {
    pub fn from_settings(s: &Settings, cache_dir: Option<PathBuf>) -> Result<Self> {
        let hurst = HurstParam::new(finite("hurst", s.get("hurst"), 0.75)?)?;
        let n: usize = num("n", s.get("n"), 64)?;
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        let n_list: Vec<usize> = list("n_list", s.get("n_list").unwrap_or("16,32,64,128,256"))?;
        if n_list.is_empty() || n_list.contains(&0) || n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "n_list must be positive and strictly increasing".into(),
            ));
        }
        let paths: usize = num("paths", s.get("paths"), 10_000)?;
        if paths == 0 {
            return Err(Error::InvalidArgument("paths must be at least 1".into()));
        }
        let seed: u64 = num("seed", s.get("seed"), 1)?;
        let times: Vec<f64> = list("times", s.get("times").unwrap_or("0.25,0.5,0.75,1"))?;
        if let Some(t) = times.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(Error::InvalidArgument(format!("times: {t} outside [0, 1]")));
        }
        let tol = finite("tol", s.get("tol"), 1e-9)?;
        if !(tol > 0.0 && tol < 1e-2) {
            return Err(Error::InvalidArgument(format!("tol must lie in (0, 1e-2), got {tol}")));
        }
        let scheme = match s.get("scheme").unwrap_or("geometric") {
            "geometric" => SchemeSpec::Geometric,
            "drift" => SchemeSpec::Drift {
                mu: finite("mu", s.get("mu"), 0.0)?,
                sigma: finite("sigma", s.get("sigma"), 1.0)?,
                s0: finite("s0", s.get("s0"), 1.0)?,
            },
            "linear_system" => SchemeSpec::LinearSystem {
                a1: finite("a1", s.get("a1"), 0.0)?,
                a2: finite("a2", s.get("a2"), 1.0)?,
                b1: finite("b1", s.get("b1"), -1.0)?,
                b2: finite("b2", s.get("b2"), 0.0)?,
                x0: finite("x0", s.get("x0"), 0.0)?,
                y0: finite("y0", s.get("y0"), 1.0)?,
            },
            "sin_cos" => SchemeSpec::SinCos,
            "pathwise_sottinen" => SchemeSpec::PathwiseSottinen,
            other => return Err(Error::InvalidArgument(format!("unknown scheme {other:?}"))),
        };
        scheme.validate()?;
        let format = match s.get("format").unwrap_or("csv") {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            other => return Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        };
        Ok(Self {
            hurst,
            n,
            n_list,
            scheme,
            paths,
            seed,
            times,
            tol,
            out: s.get("out").map(PathBuf::from),
            format,
            cache_dir,
        })
    }
}
