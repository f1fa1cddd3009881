//! Discrete Wick calculus for fractional Brownian motion on the disturbed
//! binary random walk: kernel grids, exact Walsh algebra, fast Wick powers,
//! Wick difference schemes and Monte Carlo studies.

// guards of the form `!(x > 0.0)` are meant to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod hermite;
pub mod kernel;
pub mod montecarlo;
pub mod scalar;
pub mod schemes;
pub mod stream;
pub mod symfun;
pub mod walsh;

pub use error::{Error, Result};
pub use hermite::{Certificate, SeriesCoeffs};
pub use kernel::{build_grid, GridCache, HurstParam, KernelGrid};
pub use schemes::SchemeSpec;
pub use walsh::Path;

/// Dense Walsh vector over `f64`.
pub type Walsh = walsh::WalshVector<f64>;
/// Grade-bucketed Walsh vector over `f64`.
pub type GradedWalsh = walsh::GradedWalshVector<f64>;
pub type SchemeSolutionF64 = schemes::SchemeSolution<f64>;
pub type SeriesEvalF64 = symfun::SeriesEval<f64>;
pub type ESymTableF64 = symfun::ESymTable<f64>;
pub type URecursion<'g> = schemes::URecursionState<'g, f64>;
