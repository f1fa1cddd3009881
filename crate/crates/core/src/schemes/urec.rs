use crate::error::{Error, Result};
use crate::hermite::{Certificate, SeriesCoeffs};
use crate::kernel::KernelGrid;
use crate::scalar::{factorial, Real};
use crate::walsh::{GradedWalshVector, DENSE_MAX_N, GRADED_MAX_N};

/// Default bound on the total number of stored coefficients.
pub const DEFAULT_SUPPORT_CAP: usize = 1 << 22;

/// `U^0_l, …, U^K_l` for the current step `l`.
#[derive(Debug, Clone)]
pub struct URecursionState<'g, T> {
    grid: &'g KernelGrid,
    max_order: usize,
    support_cap: usize,
    step: usize,
    u: Vec<GradedWalshVector<T>>,
}

impl<'g, T: Real> URecursionState<'g, T> {
    /// State at `l = 0`: `U^0 = 1`, `U^k = 0` for `k ≥ 1`.
    pub fn new(grid: &'g KernelGrid, max_order: usize) -> Result<Self> {
        let n = grid.n();
        if n > GRADED_MAX_N {
            return Err(Error::Capacity(format!(
                "U recursion uses masks over n <= {GRADED_MAX_N}, got n = {n}"
            )));
        }
        if max_order > n {
            return Err(Error::InvalidArgument(format!("order cap {max_order} above n = {n}")));
        }
        let mut u = Vec::with_capacity(max_order + 1);
        u.push(GradedWalshVector::unit(n, max_order)?);
        for _ in 0..max_order {
            u.push(GradedWalshVector::zero(n, max_order)?);
        }
        Ok(Self {
            grid,
            max_order,
            support_cap: DEFAULT_SUPPORT_CAP,
            step: 0,
            u,
        })
    }

    pub fn with_support_cap(mut self, cap: usize) -> Self {
        self.support_cap = cap;
        self
    }

    pub fn grid(&self) -> &'g KernelGrid {
        self.grid
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// `U^k` at the current step.
    pub fn u(&self, k: usize) -> &GradedWalshVector<T> {
        &self.u[k]
    }

    pub fn support_len(&self) -> usize {
        self.u.iter().map(GradedWalshVector::support_len).sum()
    }

    /// `U^k_l = U^k_{l−1} + k·U^{k−1}_{l−1} ⋄ ΔB_l` for every `k ≤ K`.
    pub fn advance(&mut self) -> Result<()> {
        let n = self.grid.n();
        if self.step >= n {
            return Err(Error::InvalidArgument(format!("already at the final step {n}")));
        }
        let l = self.step + 1;
        let inc: Vec<T> = self.grid.increment_row(l).iter().map(|&d| T::of(d)).collect();
        // descending k reads U^{k−1} before it is updated
        for k in (1..=self.max_order).rev() {
            let (lo, hi) = self.u.split_at_mut(k);
            lo[k - 1].wick_mul_linear_into(&inc, T::of(k as f64), &mut hi[0])?;
        }
        self.step = l;
        let used = self.support_len();
        if used > self.support_cap {
            return Err(Error::Capacity(format!(
                "U recursion support {used} exceeds the cap {}",
                self.support_cap
            )));
        }
        Ok(())
    }

    /// Advances until `step() == l`.
    pub fn run_to(&mut self, l: usize) -> Result<()> {
        while self.step < l {
            self.advance()?;
        }
        Ok(())
    }
}

/// One step of the recursion, by value.
pub fn u_step<T: Real>(mut state: URecursionState<'_, T>) -> Result<URecursionState<'_, T>> {
    state.advance()?;
    Ok(state)
}

/// Exact squared distance between the Wick-power series and the U series,
/// with the explicit upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UDifference {
    pub value: f64,
    /// `K` of the bound `K·n^{1−2H}`.
    pub constant: f64,
    /// `K·n^{1−2H}`.
    pub bound: f64,
}

/// `Σ_{k≥2} (scale·g^k)² (k−1)³ t^{2H(k−1)}/(k−1)!`, summed in closed form:
/// with `x = g² t^{2H}`, `Σ_{j≥1} j³ x^j/j! = e^x (x³ + 3x² + x)`.
pub fn rate_constant(cert: Certificate, hurst: f64, t: f64) -> f64 {
    let g2 = cert.growth * cert.growth;
    let x = g2 * t.powf(2.0 * hurst);
    cert.scale * cert.scale * g2 * x.exp() * (x * x * x + 3.0 * x * x + x)
}

/// `E|Σ_k a_k/k!·((B_t)^{⋄k} − U^k_t)|²` from exact Walsh coefficients.
///
/// The bound uses the series constant at `t = 1`, which dominates every
/// `t ∈ [0, 1]`.
pub fn u_difference_norm(grid: &KernelGrid, coeffs: &SeriesCoeffs, t: f64) -> Result<UDifference> {
    let cert = coeffs.require_certificate()?;
    let l = grid.step_of(t);
    if l > DENSE_MAX_N {
        return Err(Error::Capacity(format!(
            "exact difference enumerates 2^{l} subsets; limit is l <= {DENSE_MAX_N}"
        )));
    }
    let mut state = URecursionState::<f64>::new(grid, l)?;
    state.run_to(l)?;
    let a = coeffs.take(l)?;
    let b = grid.row(l);
    let mut prod = vec![1.0f64; 1 << l];
    let mut per_grade = vec![0.0f64; l + 1];
    for mask in 1usize..1 << l {
        let low = mask.trailing_zeros() as usize;
        prod[mask] = prod[mask & (mask - 1)] * b[low];
        let k = mask.count_ones() as usize;
        // (1/k!)(B^{⋄k} − U^k) has coefficient b_C − U^k_C/k!
        let diff = prod[mask] - state.u(k).get(mask as u64) / factorial::<f64>(k);
        per_grade[k] += diff * diff;
    }
    let value: f64 = per_grade.iter().zip(&a).map(|(s, ak)| ak * ak * s).sum();
    let h = grid.hurst().value();
    let constant = rate_constant(cert, h, 1.0);
    Ok(UDifference {
        value,
        constant,
        bound: constant * (grid.n() as f64).powf(1.0 - 2.0 * h),
    })
}
