//! Seeded Monte Carlo over random-walk paths and the convergence study.

mod stats;
mod study;

pub use stats::{ks_distance, moment_report, MomentReport};
pub use study::{run_study, Cell, CheckStatus, StudyConfig, StudyRow, StudyTarget};

use rayon::prelude::*;

use crate::error::Result;
use crate::stream::sign_path;
use crate::walsh::Path;

/// Paths of length `n` keyed by `(seed, index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathSampler {
    pub n: usize,
    pub seed: u64,
}

impl PathSampler {
    pub fn new(n: usize, seed: u64) -> Self {
        Self { n, seed }
    }

    pub fn path(&self, index: u64) -> Path {
        sign_path(self.seed, index, self.n)
    }

    /// `f(path_i)` for `i < count`, evaluated in parallel, returned in index order.
    pub fn map<R, F>(&self, count: usize, f: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(&Path) -> Result<R> + Sync + Send,
    {
        (0..count as u64).into_par_iter().map(|i| f(&self.path(i))).collect()
    }
}

/// The first `count` paths of the `(n, seed)` family.
pub fn sample_paths(n: usize, count: usize, seed: u64) -> Vec<Path> {
    let sampler = PathSampler::new(n, seed);
    (0..count as u64).map(|i| sampler.path(i)).collect()
}
