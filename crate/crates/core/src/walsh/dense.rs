use super::{check_dims, mask_bits, Path};
use crate::error::{Error, Result};
use crate::kernel::KernelGrid;
use crate::scalar::Real;

/// Largest `n` the dense engine accepts; storage is `2^n` coefficients.
pub const DENSE_MAX_N: usize = 24;

/// Dense Walsh decomposition: `coeffs[mask] = x_A`.
///
/// Operations never mutate their inputs and always return fresh vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct WalshVector<T> {
    n: usize,
    coeffs: Vec<T>,
}

fn check_capacity(n: usize) -> Result<()> {
    if n > DENSE_MAX_N {
        Err(Error::Capacity(format!(
            "dense Walsh engine holds n <= {DENSE_MAX_N}, requested n = {n}"
        )))
    } else {
        Ok(())
    }
}

impl<T: Real> WalshVector<T> {
    pub fn zero(n: usize) -> Result<Self> {
        check_capacity(n)?;
        Ok(Self {
            n,
            coeffs: vec![T::zero(); 1 << n],
        })
    }

    /// The constant one, i.e. the indicator of `∅`; unit of `⋄_n`.
    pub fn unit(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    /// `Ξ_A` for the subset encoded by `mask`.
    pub fn basis(n: usize, mask: usize) -> Result<Self> {
        let mut v = Self::zero(n)?;
        if mask >> n != 0 {
            return Err(Error::InvalidArgument(format!("mask {mask:#b} exceeds n = {n}")));
        }
        v.coeffs[mask] = T::one();
        Ok(v)
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<T>) -> Result<Self> {
        check_capacity(n)?;
        if coeffs.len() != 1 << n {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients for n = {n}, got {}",
                1usize << n,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("Walsh coefficients must be finite".into()));
        }
        Ok(Self { n, coeffs })
    }

    /// Grade-one vector `Σ_i weights[i−1] ξ_i`; missing trailing weights are zero.
    pub fn linear(n: usize, weights: &[T]) -> Result<Self> {
        if weights.len() > n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: weights.len(),
            });
        }
        let mut v = Self::zero(n)?;
        for (i, &w) in weights.iter().enumerate() {
            v.coeffs[1 << i] = w;
        }
        Ok(v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, mask: usize) -> T {
        self.coeffs[mask]
    }

    pub fn expectation(&self) -> T {
        self.coeffs[0]
    }

    /// `E[X²] = Σ_A x_A²`.
    pub fn norm_sq(&self) -> T {
        self.coeffs.iter().map(|&c| c * c).sum()
    }

    pub fn inner_product(&self, other: &Self) -> Result<T> {
        check_dims(self.n, other.n)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(&x, &y)| x * y).sum())
    }

    pub fn scaled(&self, a: T) -> Self {
        Self {
            n: self.n,
            coeffs: self.coeffs.iter().map(|&c| a * c).collect(),
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Result<Self> {
        check_dims(self.n, other.n)?;
        Ok(Self {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(T::one(), other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(T::one(), other, -T::one())
    }

    /// Largest `|x_A − y_A|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        check_dims(self.n, other.n)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&x, &y)| (x - y).abs())
            .fold(T::zero(), T::max))
    }

    /// Grade-one weights `x_{{i}}`, if every other coefficient vanishes.
    pub fn as_linear(&self) -> Option<Vec<T>> {
        let linear = self
            .coeffs
            .iter()
            .enumerate()
            .all(|(mask, c)| mask.count_ones() == 1 || c.is_zero());
        linear.then(|| (0..self.n).map(|i| self.coeffs[1 << i]).collect())
    }

    /// Part of the vector supported on masks of popcount `k`.
    pub fn grade_part(&self, k: u32) -> Self {
        Self {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(m, &c)| if m.count_ones() == k { c } else { T::zero() })
                .collect(),
        }
    }

    /// Discrete Wick product: `(X ⋄ Y)_C = Σ_{A ⊆ C} x_A y_{C∖A}`, by submask
    /// enumeration in `O(3^n)`.
    pub fn wick_product(&self, other: &Self) -> Result<Self> {
        check_dims(self.n, other.n)?;
        if let Some(w) = other.as_linear() {
            return Ok(self.wick_mul_linear(&w));
        }
        if let Some(w) = self.as_linear() {
            return Ok(other.wick_mul_linear(&w));
        }
        let x = &self.coeffs;
        let y = &other.coeffs;
        let coeffs = (0..x.len())
            .map(|c| {
                let mut acc = T::zero();
                let mut a = c;
                loop {
                    acc += x[a] * y[c ^ a];
                    if a == 0 {
                        break;
                    }
                    a = (a - 1) & c;
                }
                acc
            })
            .collect();
        Ok(Self { n: self.n, coeffs })
    }

    /// `X ⋄ Σ_i w_i ξ_i` in `O(n·2^n)`.
    pub fn wick_mul_linear(&self, weights: &[T]) -> Self {
        assert!(weights.len() <= self.n);
        let x = &self.coeffs;
        let coeffs = (0..x.len())
            .map(|c| {
                let mut acc = T::zero();
                let mut m = c;
                while m != 0 {
                    let i = m.trailing_zeros() as usize;
                    if let Some(&w) = weights.get(i) {
                        acc += x[c ^ (1 << i)] * w;
                    }
                    m &= m - 1;
                }
                acc
            })
            .collect();
        Self { n: self.n, coeffs }
    }

    /// `k`-fold Wick product; `k = 0` gives the unit.
    pub fn wick_power(&self, k: usize) -> Self {
        let mut acc = Self::unit(self.n).expect("dimension already validated");
        let linear = self.as_linear();
        for _ in 0..k {
            acc = match &linear {
                Some(w) => acc.wick_mul_linear(w),
                None => acc.wick_product(self).expect("same dimension"),
            };
        }
        acc
    }

    /// Ordinary (pointwise) product, using `Ξ_A Ξ_B = Ξ_{A Δ B}`; `O(4^n)`.
    pub fn pointwise_product(&self, other: &Self) -> Result<Self> {
        check_dims(self.n, other.n)?;
        if let Some(w) = other.as_linear() {
            return Ok(self.mul_linear_pointwise(&w));
        }
        let x = &self.coeffs;
        let y = &other.coeffs;
        let coeffs = (0..x.len())
            .map(|c| (0..x.len()).map(|a| x[a] * y[a ^ c]).sum())
            .collect();
        Ok(Self { n: self.n, coeffs })
    }

    /// Pointwise `X · Σ_i w_i ξ_i` in `O(n·2^n)`.
    pub fn mul_linear_pointwise(&self, weights: &[T]) -> Self {
        assert!(weights.len() <= self.n);
        let x = &self.coeffs;
        let coeffs = (0..x.len())
            .map(|c| weights.iter().enumerate().map(|(i, &w)| w * x[c ^ (1 << i)]).sum())
            .collect();
        Self { n: self.n, coeffs }
    }

    /// `Σ_A x_A Π_{i∈A} signs[i]`, folding one coordinate at a time.
    pub fn evaluate(&self, path: &Path) -> Result<T> {
        check_dims(self.n, path.n())?;
        let mut work = self.coeffs.clone();
        for bit in (0..self.n).rev() {
            let half = 1 << bit;
            let s = T::of(path.signs()[bit] as f64);
            let (lo, hi) = work.split_at_mut(half);
            for (a, &b) in lo.iter_mut().zip(hi.iter()) {
                *a += s * b;
            }
            work.truncate(half);
        }
        Ok(work[0])
    }

    /// `(mask_bits, coefficient)` lines sorted by mask, nonzero entries only,
    /// tab separated. Coefficients print in shortest round-trip form.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (mask, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                out.push_str(&mask_bits(mask as u64, self.n));
                out.push('\t');
                out.push_str(&format!("{c:e}"));
                out.push('\n');
            }
        }
        out
    }
}

/// Walsh decomposition of the walk at time `t`: `Σ_i b[⌊nt⌋][i] ξ_i`.
pub fn random_walk_vector<T: Real>(grid: &KernelGrid, t: f64) -> Result<WalshVector<T>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("time {t} outside [0, 1]")));
    }
    let weights: Vec<T> = grid.row_at(t).iter().map(|&b| T::of(b)).collect();
    WalshVector::linear(grid.n(), &weights)
}
