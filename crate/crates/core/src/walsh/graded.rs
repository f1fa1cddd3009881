use std::collections::BTreeMap;

use super::check_dims;
use super::dense::WalshVector;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Widest `n` a graded vector can index (masks are `u64`).
pub const GRADED_MAX_N: usize = 64;

/// Sparse Walsh expansion bucketed by grade `|A|`, capped at `max_grade`.
///
/// Bucket `k` only ever holds masks of popcount `k`. Writing above the cap is
/// an error, never a silent truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedWalshVector<T> {
    n: usize,
    max_grade: usize,
    grades: Vec<BTreeMap<u64, T>>,
}

impl<T: Real> GradedWalshVector<T> {
    pub fn zero(n: usize, max_grade: usize) -> Result<Self> {
        if n > GRADED_MAX_N {
            return Err(Error::Capacity(format!(
                "graded Walsh vectors index n <= {GRADED_MAX_N}, requested n = {n}"
            )));
        }
        Ok(Self {
            n,
            max_grade,
            grades: vec![BTreeMap::new(); max_grade + 1],
        })
    }

    pub fn unit(n: usize, max_grade: usize) -> Result<Self> {
        let mut v = Self::zero(n, max_grade)?;
        v.grades[0].insert(0, T::one());
        Ok(v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_grade(&self) -> usize {
        self.max_grade
    }

    pub fn grade(&self, k: usize) -> &BTreeMap<u64, T> {
        &self.grades[k]
    }

    pub fn get(&self, mask: u64) -> T {
        let k = mask.count_ones() as usize;
        self.grades
            .get(k)
            .and_then(|g| g.get(&mask).copied())
            .unwrap_or_else(T::zero)
    }

    /// Number of stored coefficients across all grades.
    pub fn support_len(&self) -> usize {
        self.grades.iter().map(BTreeMap::len).sum()
    }

    /// Adds `value` to the coefficient of `mask`.
    pub fn add_to(&mut self, mask: u64, value: T) -> Result<()> {
        let k = mask.count_ones() as usize;
        if self.n < 64 && mask >> self.n != 0 {
            return Err(Error::InvalidArgument(format!("mask {mask:#b} exceeds n = {}", self.n)));
        }
        if k > self.max_grade {
            return Err(Error::Capacity(format!(
                "grade {k} exceeds the configured cap {}",
                self.max_grade
            )));
        }
        *self.grades[k].entry(mask).or_insert_with(T::zero) += value;
        Ok(())
    }

    pub fn norm_sq(&self) -> T {
        self.grades.iter().flat_map(|g| g.values()).map(|&c| c * c).sum()
    }

    pub fn inner_product(&self, other: &Self) -> Result<T> {
        check_dims(self.n, other.n)?;
        let mut acc = T::zero();
        for (a, b) in self.grades.iter().zip(&other.grades) {
            for (mask, &x) in a {
                if let Some(&y) = b.get(mask) {
                    acc += x * y;
                }
            }
        }
        Ok(acc)
    }

    /// `self ⋄ Σ_i w_i ξ_i` as a vector one grade higher in every bucket.
    pub fn wick_mul_linear(&self, weights: &[T]) -> Result<Self> {
        let mut out = Self::zero(self.n, self.max_grade)?;
        self.wick_mul_linear_into(weights, T::one(), &mut out)?;
        Ok(out)
    }

    /// Accumulates `factor · (self ⋄ Σ_i w_i ξ_i)` into `out`.
    pub(crate) fn wick_mul_linear_into(&self, weights: &[T], factor: T, out: &mut Self) -> Result<()> {
        check_dims(self.n, out.n)?;
        for (k, bucket) in self.grades.iter().enumerate() {
            if bucket.is_empty() {
                continue;
            }
            if k + 1 > out.max_grade {
                return Err(Error::Capacity(format!(
                    "Wick product would reach grade {} above the cap {}",
                    k + 1,
                    out.max_grade
                )));
            }
            let target = &mut out.grades[k + 1];
            for (&mask, &x) in bucket {
                for (i, &w) in weights.iter().enumerate() {
                    let bit = 1u64 << i;
                    if mask & bit == 0 && !w.is_zero() {
                        *target.entry(mask | bit).or_insert_with(T::zero) += factor * x * w;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_dense(&self) -> Result<WalshVector<T>> {
        let mut coeffs = WalshVector::<T>::zero(self.n)?.coeffs().to_vec();
        for bucket in &self.grades {
            for (&mask, &c) in bucket {
                coeffs[mask as usize] = c;
            }
        }
        WalshVector::from_coeffs(self.n, coeffs)
    }

    /// Lossless conversion; fails if the dense vector has mass above `max_grade`.
    pub fn from_dense(dense: &WalshVector<T>, max_grade: usize) -> Result<Self> {
        let mut v = Self::zero(dense.n(), max_grade)?;
        for (mask, &c) in dense.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = mask.count_ones() as usize;
            if k > max_grade {
                return Err(Error::Capacity(format!(
                    "dense vector has grade-{k} mass above the cap {max_grade}"
                )));
            }
            v.grades[k].insert(mask as u64, c);
        }
        Ok(v)
    }
}
