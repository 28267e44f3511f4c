//! Comparison bounds: Poisson subsampling under replace-one adjacency, and the general
//! fixed-size subsampling upper and lower bounds of Wang et al. specialised to the Gaussian mechanism.

use crate::curve::{compose_with, Epsilon, RdpCurve};
use crate::error::{domain, Result};
use crate::fswor::{check_args, ln_falling, ln_replace_one_excess};
use crate::fswr::{integer_orders, ln_expm1, lower_point};
use crate::real::{as_integer, from_usize, ln_binomial, ln_factorial, lit, log1p_exp, Real};
use crate::signed_log::{self, SignedLog};

/// Base RDP `ε(j) = 2j/σ²` of the unsubsampled Gaussian step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WangEpsilonSchedule<T> {
    pub sigma: T,
}

impl<T: Real> WangEpsilonSchedule<T> {
    pub fn new(sigma: T) -> Result<Self> {
        if !(sigma > T::zero()) {
            return domain(format!("sigma must be positive, got {sigma}"));
        }
        Ok(Self { sigma })
    }

    pub fn epsilon(&self, j: usize) -> T {
        lit::<T>(2.0) * from_usize(j) / (self.sigma * self.sigma)
    }
}

/// `ln(2 sinh(1/σ²))`.
fn ln_poisson_coefficient<T: Real>(sigma: T) -> T {
    let x = T::one() / (sigma * sigma);
    x + (-(lit::<T>(-2.0) * x).exp_m1()).ln()
}

/// One-step Poisson-subsampling bound under replace-one adjacency.
pub fn poisson_replace_one_step<T: Real>(alpha: T, sigma: T, q: T, m: usize) -> Result<Epsilon<T>> {
    check_args(alpha, sigma, q, m)?;
    let s = ln_replace_one_excess(alpha, lit::<T>(2.0) * sigma, ln_poisson_coefficient(sigma), q, m)?;
    Ok(Epsilon::from_excess(s, alpha))
}

/// `K(α)` for integer `α >= 2`.
fn wang_k<T: Real>(alpha: usize, sched: &WangEpsilonSchedule<T>, q: T) -> T {
    if q == T::zero() {
        return T::zero();
    }
    let a = from_usize::<T>(alpha);
    let ln_q = q.ln();
    let ln_two = lit::<T>(2.0).ln();
    let mut terms = Vec::with_capacity(alpha);
    for j in (3..=alpha).rev() {
        let (_, ln_prod) = ln_falling(a, j);
        let ln_t = ln_two + ln_q * from_usize(j) + ln_prod - ln_factorial::<T>(j)
            + from_usize::<T>(j - 1) * sched.epsilon(j);
        terms.push(SignedLog::from_ln(ln_t));
    }
    terms.push(SignedLog::from_ln(
        ln_two + ln_q * lit(2.0) + a.ln() + (a - T::one()).ln() + ln_expm1(sched.epsilon(2)),
    ));
    log1p_exp(signed_log::sum(&terms).log_magnitude())
}

/// Wang et al. upper bound; convex interpolation of `K` between integers,
/// and the `α = 2` value on `(1, 2)`.
pub fn wang_upper<T: Real>(alpha: T, sigma: T, q: T) -> Result<Epsilon<T>> {
    check_args(alpha, sigma, q, 3)?;
    let sched = WangEpsilonSchedule::new(sigma)?;
    let value = if alpha < lit(2.0) {
        wang_k(2, &sched, q)
    } else {
        let lo = alpha.floor();
        let frac = alpha - lo;
        let lo_i = lo.to_usize().expect("finite order");
        let k_lo = wang_k(lo_i, &sched, q);
        if frac == T::zero() {
            k_lo / (alpha - T::one())
        } else {
            let k_hi = wang_k(lo_i + 1, &sched, q);
            ((T::one() - frac) * k_lo + frac * k_hi) / (alpha - T::one())
        }
    };
    Ok(Epsilon {
        value,
        saturated: value == T::infinity(),
        clamped: false,
    })
}

/// Wang et al. lower bound for integer `α >= 2`.
///
/// Multiplying the bracket by `(1-q)^α` turns it into the binomial expectation
/// `Σ_j C(α,j) q^j (1-q)^{α-j} e^{2j(j-1)/σ²}`, which is evaluated as `1 + Σ (·)(e^{·} - 1)`.
pub fn wang_lower<T: Real>(alpha: T, sigma: T, q: T) -> Result<T> {
    let order = match as_integer(alpha) {
        Some(a) if a >= 2 => a,
        _ => return domain(format!("lower bound needs an integer order >= 2, got {alpha}")),
    };
    check_args(alpha, sigma, q, 3)?;
    if q == T::zero() {
        return Ok(T::zero());
    }
    let sched = WangEpsilonSchedule::new(sigma)?;
    let ln_q = q.ln();
    let ln_1mq = (-q).ln_1p();
    let terms: Vec<SignedLog<T>> = (2..=order)
        .rev()
        .map(|j| {
            SignedLog::from_ln(
                ln_binomial::<T>(order, j)
                    + ln_q * from_usize(j)
                    + ln_1mq * from_usize(order - j)
                    + ln_expm1(from_usize::<T>(j - 1) * sched.epsilon(j)),
            )
        })
        .collect();
    Ok(log1p_exp(signed_log::sum(&terms).log_magnitude()) / (alpha - T::one()))
}

/// T-step Poisson replace-one curve.
pub fn compose_poisson<T: Real>(alphas: &[T], sigmas: &[T], q: T, m: usize) -> Result<RdpCurve<T>> {
    compose_with("poisson_ro", alphas, sigmas, |a, s| poisson_replace_one_step(a, s, q, m))
}

/// T-step Wang et al. upper curve.
pub fn compose_wang_upper<T: Real>(alphas: &[T], sigmas: &[T], q: T) -> Result<RdpCurve<T>> {
    compose_with("wang_upper", alphas, sigmas, |a, s| wang_upper(a, s, q))
}

/// T-step Wang et al. lower curve on the integer orders `>= 2` of `alphas`.
pub fn compose_wang_lower<T: Real>(alphas: &[T], sigmas: &[T], q: T) -> Result<RdpCurve<T>> {
    let orders = integer_orders(alphas)?;
    compose_with("wang_lower", &orders, sigmas, |a, s| wang_lower(a, s, q).map(lower_point))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_coefficient() {
        let c = ln_poisson_coefficient(6.0f64).exp();
        assert!((c - 2.0 * (1.0f64 / 36.0).sinh()).abs() < 1e-16);
        assert!((c - 0.055_562_7).abs() < 1e-7);
    }

    #[test]
    fn zero_rate() {
        assert_eq!(wang_upper(3.0f64, 6.0, 0.0).unwrap().value, 0.0);
        assert_eq!(wang_lower(3.0f64, 6.0, 0.0).unwrap(), 0.0);
        assert_eq!(poisson_replace_one_step(3.0f64, 6.0, 0.0, 4).unwrap().value, 0.0);
    }

    #[test]
    fn below_two_uses_order_two() {
        let a = wang_upper(1.3f64, 6.0, 0.01).unwrap().value;
        let b = wang_upper(2.0f64, 6.0, 0.01).unwrap().value;
        assert_eq!(a, b);
    }

    #[test]
    fn interpolation_between_integers() {
        let q = 0.01f64;
        let k3 = 2.0 * wang_upper(3.0, 6.0, q).unwrap().value;
        let k4 = 3.0 * wang_upper(4.0, 6.0, q).unwrap().value;
        let mid = wang_upper(3.25, 6.0, q).unwrap().value;
        assert!((mid - (0.75 * k3 + 0.25 * k4) / 2.25).abs() < 1e-17);
    }

    #[test]
    fn lower_rejects_fractional_orders() {
        assert!(wang_lower(2.5f64, 6.0, 0.01).is_err());
        assert!(wang_lower(1.0f64, 6.0, 0.01).is_err());
    }

    #[test]
    fn schedule_is_linear() {
        let s = WangEpsilonSchedule::new(6.0f64).unwrap();
        assert!((s.epsilon(3) - 6.0 / 36.0).abs() < 1e-16);
        assert!(WangEpsilonSchedule::new(0.0f64).is_err());
    }
}
