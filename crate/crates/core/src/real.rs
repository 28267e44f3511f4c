//! Scalar abstraction shared by every numeric kernel.

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// Floating-point scalar accepted by the accountant kernels.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

/// A value that saturates to `+inf` on overflow instead of failing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Saturating<T> {
    pub value: T,
    /// Set when the exact result exceeds the representable range.
    pub saturated: bool,
}

impl<T: Real> Saturating<T> {
    /// `e^{ln_value}` with overflow recorded.
    pub fn from_ln(ln_value: T) -> Self {
        let value = ln_value.exp();
        Self {
            value,
            saturated: value == T::infinity(),
        }
    }
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable")
}

#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("usize representable")
}

/// `ln(n!)`.
pub fn ln_factorial<T: Real>(n: usize) -> T {
    lit(statrs::function::factorial::ln_factorial(n as u64))
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial<T: Real>(n: usize, k: usize) -> T {
    if k > n {
        return T::neg_infinity();
    }
    lit(statrs::function::factorial::ln_binomial(n as u64, k as u64))
}

/// Returns `Some(n)` when `x` is a non-negative integer.
pub fn as_integer<T: Real>(x: T) -> Option<usize> {
    if x >= T::zero() && x.fract() == T::zero() {
        x.to_usize()
    } else {
        None
    }
}

/// `ceil(x)` as an index.
pub fn ceil_index<T: Real>(x: T) -> usize {
    x.ceil().to_usize().expect("finite non-negative order")
}

/// Numerically stable `ln(e^a + e^b)`.
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == T::infinity() {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Numerically stable `ln(sum e^{x_i})`.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() || max == T::infinity() {
        return max;
    }
    let s = xs.iter().fold(T::zero(), |acc, &x| acc + (x - max).exp());
    max + s.ln()
}

/// `ln(1 + e^x)` without overflow.
pub fn log1p_exp<T: Real>(x: T) -> T {
    if x > lit(35.0) {
        x + (-x).exp()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(1 - p + p e^x)` for `p` in `[0, 1]` and `x >= 0`.
pub fn log_binomial_mgf<T: Real>(p: T, x: T) -> T {
    if p == T::zero() {
        return T::zero();
    }
    if x < lit(30.0) {
        (p * x.exp_m1()).ln_1p()
    } else {
        x + p.ln() + ((T::one() - p).ln() - p.ln() - x).exp().ln_1p()
    }
}

/// Deterministic pairwise summation.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    const LEAF: usize = 16;
    if xs.len() <= LEAF {
        return xs.iter().fold(T::zero(), |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_add_exp_handles_infinities() {
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 2.0), 2.0);
        assert!((log_add_exp(0.0f64, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_add_exp(1000.0f64, 0.0), 1000.0);
    }

    #[test]
    fn binomial_mgf_matches_direct() {
        for &(p, x) in &[(0.1f64, 0.5f64), (1e-5, 3.0), (0.3, 45.0), (1e-4, 80.0)] {
            let direct = (1.0 - p + p * x.exp()).ln();
            let got = log_binomial_mgf(p, x);
            assert!((got - direct).abs() <= 1e-11 * direct.abs(), "{p} {x}");
        }
    }

    #[test]
    fn factorial_helpers() {
        assert!((ln_factorial::<f64>(5) - 120f64.ln()).abs() < 1e-13);
        assert!((ln_binomial::<f64>(6, 2) - 15f64.ln()).abs() < 1e-13);
        assert_eq!(ln_binomial::<f64>(2, 3), f64::NEG_INFINITY);
        assert_eq!(as_integer(3.0f64), Some(3));
        assert_eq!(as_integer(3.5f64), None);
    }

    #[test]
    fn pairwise_sum_of_constants() {
        let xs = vec![0.1f64; 1000];
        assert!((pairwise_sum(&xs) - 100.0).abs() < 1e-12);
    }
}
