//! Fixed-size subsampling without replacement: one-step and T-step RDP upper bounds.
//!
//! Every bracket `1 + S` is assembled as `S` in signed log-space, so very large orders
//! produce finite bounds, and `ln(1 + S)` keeps full precision when `S` is tiny.

use crate::curve::{compose_with, AccountantConfig, Adjacency, Epsilon, RdpCurve};
use crate::error::{domain, Result};
use crate::moments::{ln_moment_btilde, ln_moment_m};
use crate::real::{ceil_index, from_usize, ln_binomial, ln_factorial, lit, log1p_exp, log_sum_exp, Real, Saturating};
use crate::signed_log::{self, SignedLog};

/// Default Taylor order under add/remove adjacency.
pub const DEFAULT_ORDER_ADD_REMOVE: usize = 3;
/// Default Taylor order under replace-one adjacency.
pub const DEFAULT_ORDER_REPLACE_ONE: usize = 4;

pub(crate) fn check_args<T: Real>(alpha: T, sigma: T, q: T, m: usize) -> Result<()> {
    if !(alpha > T::one()) || !alpha.is_finite() {
        return domain(format!("alpha must be finite and > 1, got {alpha}"));
    }
    if !(sigma > T::zero()) {
        return domain(format!("sigma must be positive, got {sigma}"));
    }
    if !(q >= T::zero() && q < T::one()) {
        return domain(format!("sampling rate must lie in [0, 1), got {q}"));
    }
    if m < 3 {
        return domain(format!("Taylor order must be >= 3, got {m}"));
    }
    Ok(())
}

/// Sign and `ln|·|` of `Π_{j<k} (α - j)`.
pub(crate) fn ln_falling<T: Real>(alpha: T, k: usize) -> (i8, T) {
    let mut sign = 1i8;
    let mut acc = T::zero();
    for j in 0..k {
        let f = alpha - from_usize(j);
        if f == T::zero() {
            return (0, T::neg_infinity());
        }
        if f < T::zero() {
            sign = -sign;
        }
        acc = acc + f.abs().ln();
    }
    (sign, acc)
}

/// `Σ_ℓ q^ℓ (n!/(n-ℓ)!) (m!/(m+ℓ)!) B̃_{ℓ+m}` over `ℓ = 0..=n`, in log form.
fn ln_binomial_tail<T: Real>(sigma: T, q: T, n: usize, m: usize) -> Result<T> {
    let ln_q = q.ln();
    let mut terms = Vec::with_capacity(n + 1);
    for l in 0..=n {
        let lq = if l == 0 { T::zero() } else { ln_q * from_usize(l) };
        terms.push(
            lq + ln_factorial::<T>(n) - ln_factorial::<T>(n - l) + ln_factorial::<T>(m)
                - ln_factorial::<T>(m + l)
                + ln_moment_btilde(sigma, l + m)?,
        );
    }
    Ok(log_sum_exp(&terms))
}

/// `H - 1` upper bound in signed log form; terms summed from the remainder downward.
pub(crate) fn ln_h_excess<T: Real>(alpha: T, sigma: T, q: T, m: usize) -> Result<SignedLog<T>> {
    check_args(alpha, sigma, q, m)?;
    if q == T::zero() {
        return Ok(SignedLog::zero());
    }
    let ln_q = q.ln();
    let mut terms = Vec::with_capacity(m);

    let (rsign, ln_prod_m) = ln_falling(alpha, m);
    if rsign != 0 {
        let ln_rem = if alpha - from_usize(m) > T::zero() {
            let n = ceil_index(alpha) - m;
            let tail = ln_binomial_tail(sigma, q, n, m)? - ln_factorial::<T>(m);
            let head = ln_moment_btilde(sigma, m)? - ln_factorial::<T>(m);
            ln_q * from_usize(m) + ln_prod_m + crate::real::log_add_exp(tail, head)
        } else {
            ln_q * from_usize(m) - ln_factorial::<T>(m)
                + (alpha - from_usize(m)) * (-q).ln_1p()
                + ln_prod_m
                + ln_moment_btilde(sigma, m)?
        };
        terms.push(SignedLog::from_ln(ln_rem));
    }
    for k in (2..m).rev() {
        let (sign, ln_prod) = ln_falling(alpha, k);
        if sign == 0 {
            continue;
        }
        let ln_term = ln_q * from_usize(k) - ln_factorial::<T>(k) + ln_prod + ln_moment_m(sigma, k)?;
        terms.push(SignedLog::from_parts(sign, ln_term));
    }
    Ok(signed_log::sum(&terms))
}

/// Taylor upper bound on `H_{α,σ}(q)` with a rigorous order-`m` remainder.
pub fn h_upper<T: Real>(alpha: T, sigma: T, q: T, m: usize) -> Result<Saturating<T>> {
    let s = ln_h_excess(alpha, sigma, q, m)?;
    if s.sign() <= 0 {
        return Ok(Saturating {
            value: T::one(),
            saturated: false,
        });
    }
    Ok(Saturating::from_ln(log1p_exp(s.log_magnitude())))
}

/// One-step add/remove bound `ln(h_upper)/(α-1)`.
pub fn step_add_remove<T: Real>(alpha: T, sigma: T, q: T, m: usize) -> Result<Epsilon<T>> {
    Ok(Epsilon::from_excess(ln_h_excess(alpha, sigma, q, m)?, alpha))
}

/// `ln F̃_{α,σ,k}`.
fn ln_f_tilde<T: Real>(alpha: T, sigma: T, k: usize) -> Result<T> {
    let lead: T = if k.is_multiple_of(2) { lit(4.0) } else { lit(3.0) };
    let ratio = alpha / (alpha - T::one());
    let mut spread = T::zero();
    for j in 0..=k {
        let mut p = ratio;
        for l in 0..j {
            p = p * (T::one() - from_usize::<T>(l) / alpha);
        }
        for l in 0..(k - j) {
            p = p * (T::one() + (from_usize::<T>(l) - T::one()) / alpha);
        }
        spread = spread + ln_binomial::<T>(k, j).exp() * (p - T::one()).abs();
    }
    Ok((alpha - T::one()).ln()
        + alpha.ln() * from_usize(k - 1)
        + ln_moment_btilde(sigma, k)?
        + (lead + spread).ln())
}

/// `ln Ẽ_{α,σ,m}(q)`.
fn ln_e_tilde<T: Real>(alpha: T, sigma: T, q: T, m: usize) -> Result<T> {
    let ln_q = q.ln();
    let ln_1mq = (-q).ln_1p();
    let ln_bm = ln_moment_btilde(sigma, m)?;
    let mut terms = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let (sign, ln_prod) = ln_falling(alpha, j);
        if sign == 0 {
            continue;
        }
        let mut ln_w = -(alpha + from_usize::<T>(m) - from_usize::<T>(j) - T::one()) * ln_1mq
            + ln_binomial::<T>(m, j)
            + ln_prod;
        for l in 0..(m - j) {
            ln_w = ln_w + (alpha + from_usize::<T>(l) - T::one()).ln();
        }
        let gap = alpha - from_usize(j);
        let ln_case = if gap <= T::zero() {
            gap * ln_1mq + ln_bm
        } else {
            let n = ceil_index(alpha) - j;
            crate::real::log_add_exp(ln_bm, ln_binomial_tail(sigma, q, n, m)?)
        };
        terms.push(ln_w + ln_case);
    }
    Ok(ln_q * from_usize(m) - ln_factorial::<T>(m) + log_sum_exp(&terms))
}

/// Replace-one bracket minus one. The higher-order terms use `sigma_moments`.
pub(crate) fn ln_replace_one_excess<T: Real>(
    alpha: T,
    sigma_moments: T,
    ln_second_coefficient: T,
    q: T,
    m: usize,
) -> Result<SignedLog<T>> {
    check_args(alpha, sigma_moments, q, m)?;
    if q == T::zero() {
        return Ok(SignedLog::zero());
    }
    let ln_q = q.ln();
    let mut terms = Vec::with_capacity(m);
    terms.push(SignedLog::from_ln(ln_e_tilde(alpha, sigma_moments, q, m)?));
    for k in (3..m).rev() {
        let ln_term =
            ln_q * from_usize(k) - ln_factorial::<T>(k) + ln_f_tilde(alpha, sigma_moments, k)?;
        terms.push(SignedLog::from_ln(ln_term));
    }
    let ln_second = ln_q * lit(2.0) + alpha.ln() + (alpha - T::one()).ln() + ln_second_coefficient;
    terms.push(SignedLog::from_ln(ln_second));
    Ok(signed_log::sum(&terms))
}

/// `ln(e^{4/σ²} - e^{2/σ²})`.
pub(crate) fn ln_replace_one_coefficient<T: Real>(sigma: T) -> T {
    let half_c = lit::<T>(2.0) / (sigma * sigma);
    half_c + half_c.exp_m1().ln()
}

/// One-step replace-one bound.
pub fn step_replace_one<T: Real>(alpha: T, sigma: T, q: T, m: usize) -> Result<Epsilon<T>> {
    check_args(alpha, sigma, q, m)?;
    let s = ln_replace_one_excess(alpha, sigma, ln_replace_one_coefficient(sigma), q, m)?;
    Ok(Epsilon::from_excess(s, alpha))
}

/// T-step curve `Σ_t step(α, σ_t)` with the step chosen by the adjacency relation.
pub fn compose<T: Real>(config: &AccountantConfig<T>) -> Result<RdpCurve<T>> {
    config.validate()?;
    let q: T = config.spec.q();
    let m = config.taylor_order;
    match config.adjacency {
        Adjacency::AddRemove => compose_with("fswor_ar", &config.alpha_grid, &config.sigmas, |a, s| {
            step_add_remove(a, s, q, m)
        }),
        Adjacency::ReplaceOne => compose_with("fswor_ro", &config.alpha_grid, &config.sigmas, |a, s| {
            step_replace_one(a, s, q, m)
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_upper_at_zero_rate_is_one() {
        for alpha in [1.5f64, 2.0, 7.3, 40.0] {
            assert_eq!(h_upper(alpha, 6.0, 0.0, 3).unwrap().value, 1.0);
            assert_eq!(step_add_remove(alpha, 6.0, 0.0, 4).unwrap().value, 0.0);
            assert_eq!(step_replace_one(alpha, 6.0, 0.0, 4).unwrap().value, 0.0);
        }
    }

    #[test]
    fn alpha_two_is_exact() {
        let h = h_upper(2.0f64, 6.0, 0.1, 3).unwrap().value;
        let exact = 1.0 + 0.01 * (1.0f64 / 9.0).exp_m1();
        assert!((h - exact).abs() < 1e-15);
        assert!((h - 1.001_175_190).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(h_upper(1.0f64, 6.0, 0.1, 3).is_err());
        assert!(h_upper(2.0f64, 0.0, 0.1, 3).is_err());
        assert!(h_upper(2.0f64, 6.0, 1.0, 3).is_err());
        assert!(h_upper(2.0f64, 6.0, 0.1, 2).is_err());
        assert!(step_replace_one(2.0f64, 6.0, 1.0, 4).is_err());
    }

    #[test]
    fn falling_product_signs() {
        let (s, l) = ln_falling(2.5f64, 4);
        assert_eq!(s, -1);
        assert!((l.exp() - 2.5 * 1.5 * 0.5 * 0.5).abs() < 1e-14);
        assert_eq!(ln_falling(3.0f64, 4).0, 0);
    }

    #[test]
    fn second_order_coefficients() {
        let c = ln_replace_one_coefficient(6.0f64).exp();
        assert!((c - ((4.0f64 / 36.0).exp() - (2.0f64 / 36.0).exp())).abs() < 1e-16);
        assert!((c - 0.060_391_3).abs() < 1e-7);
    }

    #[test]
    fn large_alpha_stays_finite() {
        let e = step_replace_one(256.0f64, 6.0, 0.0024, 4).unwrap();
        assert!(e.value.is_finite() && !e.saturated);
        let e = step_add_remove(256.0f64, 2.0, 0.0024, 3).unwrap();
        assert!(e.value.is_finite());
    }

    #[test]
    fn generic_over_f32() {
        let a = step_add_remove(3.5f32, 6.0, 0.01, 3).unwrap().value as f64;
        let b = step_add_remove(3.5f64, 6.0, 0.01, 3).unwrap().value;
        assert!(((a - b) / b).abs() < 1e-4);
    }
}
