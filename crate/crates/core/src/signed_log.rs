//! Signed values stored as `(sign, ln|x|)`.

use crate::real::{lit, Real};
use std::cmp::Ordering;

/// A real number represented by its sign and the natural log of its magnitude.
///
/// Zero is encoded as `sign == 0` with `log_magnitude == -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog<T> {
    sign: i8,
    log_magnitude: T,
}

#[allow(clippy::should_implement_trait)]
impl<T: Real> SignedLog<T> {
    pub fn zero() -> Self {
        Self {
            sign: 0,
            log_magnitude: T::neg_infinity(),
        }
    }

    pub fn one() -> Self {
        Self {
            sign: 1,
            log_magnitude: T::zero(),
        }
    }

    /// Builds a value from an explicit sign and log-magnitude.
    pub fn from_parts(sign: i8, log_magnitude: T) -> Self {
        if sign == 0 || log_magnitude == T::neg_infinity() {
            Self::zero()
        } else {
            Self {
                sign: sign.signum(),
                log_magnitude,
            }
        }
    }

    /// Positive value `e^{log_magnitude}`.
    pub fn from_ln(log_magnitude: T) -> Self {
        Self::from_parts(1, log_magnitude)
    }

    pub fn from_real(x: T) -> Self {
        if x == T::zero() {
            Self::zero()
        } else {
            Self::from_parts(if x > T::zero() { 1 } else { -1 }, x.abs().ln())
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn log_magnitude(&self) -> T {
        self.log_magnitude
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Converts back to a plain real; overflows to `±inf`.
    pub fn to_real(&self) -> T {
        match self.sign {
            0 => T::zero(),
            s => {
                let m = self.log_magnitude.exp();
                if s > 0 {
                    m
                } else {
                    -m
                }
            }
        }
    }

    pub fn neg(self) -> Self {
        Self::from_parts(-self.sign, self.log_magnitude)
    }

    pub fn mul(self, other: Self) -> Self {
        Self::from_parts(self.sign * other.sign, self.log_magnitude + other.log_magnitude)
    }

    /// Multiplies by the positive factor `e^{ln_factor}`.
    pub fn scale_ln(self, ln_factor: T) -> Self {
        Self::from_parts(self.sign, self.log_magnitude + ln_factor)
    }

    pub fn sqrt(self) -> Self {
        assert!(self.sign >= 0, "square root of a negative value");
        Self::from_parts(self.sign, self.log_magnitude * lit(0.5))
    }

    pub fn add(self, other: Self) -> Self {
        sum(&[self, other])
    }
}

/// Sums signed log values in the given order after shifting by the largest magnitude.
pub fn sum<T: Real>(terms: &[SignedLog<T>]) -> SignedLog<T> {
    let max = terms
        .iter()
        .filter(|t| t.sign != 0)
        .map(|t| t.log_magnitude)
        .fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return SignedLog::zero();
    }
    if max == T::infinity() {
        let mut sign = 0i8;
        for t in terms.iter().filter(|t| t.log_magnitude == T::infinity()) {
            if sign == 0 {
                sign = t.sign;
            } else if sign != t.sign {
                return SignedLog::from_parts(1, T::nan());
            }
        }
        return SignedLog::from_parts(sign, T::infinity());
    }
    let acc = terms.iter().fold(T::zero(), |acc, t| {
        acc + lit::<T>(t.sign as f64) * (t.log_magnitude - max).exp()
    });
    match acc.partial_cmp(&T::zero()) {
        Some(Ordering::Greater) => SignedLog::from_parts(1, max + acc.ln()),
        Some(Ordering::Less) => SignedLog::from_parts(-1, max + (-acc).ln()),
        _ => SignedLog::zero(),
    }
}
