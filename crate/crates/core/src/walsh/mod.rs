//! Exact discrete chaos algebra on `{±1}^n`.
//!
//! A random variable measurable with respect to `n` symmetric Bernoulli signs
//! `ξ_1..ξ_n` is stored through its Walsh decomposition `X = Σ_A x_A Ξ_A`,
//! `Ξ_A = Π_{i∈A} ξ_i`. Subsets are bitmasks: bit `i − 1` set means `i ∈ A`.
//! This convention is used by every dump and file in the crate.

mod dense;
mod graded;

pub use dense::{random_walk_vector, WalshVector, DENSE_MAX_N};
pub use graded::{GradedWalshVector, GRADED_MAX_N};

use crate::error::{Error, Result};

/// One realisation of the signs `ξ_1..ξ_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    signs: Vec<i8>,
}

impl Path {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if let Some(bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument(format!("path entries must be ±1, found {bad}")));
        }
        Ok(Self { signs })
    }

    pub(crate) fn from_signs_unchecked(signs: Vec<i8>) -> Self {
        Self { signs }
    }

    /// Path whose `i`-th sign is `+1` iff bit `i − 1` of `bits` is set.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        assert!(n <= 64);
        let signs = (0..n).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect();
        Self { signs }
    }

    pub fn n(&self) -> usize {
        self.signs.len()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Sign of `ξ_i`, one-based.
    pub fn sign(&self, i: usize) -> i8 {
        self.signs[i - 1]
    }

    /// `Ξ_A` evaluated on this path.
    pub fn monomial(&self, mask: u64) -> i8 {
        let mut m = mask;
        let mut s = 1i8;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            s *= self.signs[i];
            m &= m - 1;
        }
        s
    }
}

pub(crate) fn check_dims(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}

/// Renders a mask as an `n`-character string, element 1 first.
pub fn mask_bits(mask: u64, n: usize) -> String {
    (0..n).map(|i| if mask >> i & 1 == 1 { '1' } else { '0' }).collect()
}
