//! Central moments `M_{σ,k} = E[(L-1)^k]` of the Gaussian likelihood ratio
//! `L = e^{Z - c/2}`, `Z ~ N(0, c)`, `c = 4/σ²`, and the Cauchy-Schwarz bound `B̃_{σ,j}`.
//!
//! The alternating binomial sum is summed in signed log-space from the highest
//! order term downward. When its terms cancel heavily (small `c`), the same
//! quantity is obtained from a series with non-negative terms instead:
//! `M_k = k! Σ_n t_k^{(n)}` with
//! `t_j^{(n+1)} = (c/2)/(n+1) [t_{j-2}^{(n)} + 2(j-1) t_{j-1}^{(n)} + j(j-1) t_j^{(n)}]`, `t^{(0)} = e_0`.

use crate::error::{domain, Result};
use crate::real::{ln_binomial, ln_factorial, lit, log_add_exp, log_sum_exp, Real, Saturating};
use crate::signed_log::{self, SignedLog};
use once_cell::sync::Lazy;
use parking_lot::RwLock;
use std::any::TypeId;
use std::collections::HashMap;

/// Validated `(σ, k)` pair identifying one moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentKey<T> {
    pub sigma: T,
    pub k: usize,
}

impl<T: Real> MomentKey<T> {
    pub fn new(sigma: T, k: usize) -> Result<Self> {
        if !(sigma > T::zero()) {
            return domain(format!("sigma must be positive, got {sigma}"));
        }
        Ok(Self { sigma, k })
    }
}

type CacheKey = (TypeId, u64, usize);

static CACHE: Lazy<RwLock<HashMap<CacheKey, f64>>> = Lazy::new(|| RwLock::new(HashMap::new()));

/// `ln M_{σ,k}` (`-inf` when the moment is zero). Memoized per exact `σ` bit pattern.
pub fn ln_moment_m<T: Real>(sigma: T, k: usize) -> Result<T> {
    let key = MomentKey::new(sigma, k)?;
    let sigma64 = key.sigma.to_f64().expect("finite or infinite sigma");
    let cache_key = (TypeId::of::<T>(), sigma64.to_bits(), k);
    if let Some(&v) = CACHE.read().get(&cache_key) {
        return Ok(lit(v));
    }
    let c = lit::<T>(4.0) / (sigma * sigma);
    let v = ln_moment_for_c(c, k);
    CACHE
        .write()
        .insert(cache_key, v.to_f64().expect("representable"));
    Ok(v)
}

/// `ln B̃_{σ,j}`.
pub fn ln_moment_btilde<T: Real>(sigma: T, j: usize) -> Result<T> {
    if j == 0 {
        return domain("B-tilde order must be at least 1");
    }
    if j.is_multiple_of(2) {
        ln_moment_m(sigma, j)
    } else {
        let lo = ln_moment_m(sigma, j - 1)?;
        let hi = ln_moment_m(sigma, j + 1)?;
        Ok((lo + hi) * lit(0.5))
    }
}

/// `M_{σ,k}`, saturating to `+inf` on overflow.
pub fn moment_m<T: Real>(sigma: T, k: usize) -> Result<Saturating<T>> {
    Ok(Saturating::from_ln(ln_moment_m(sigma, k)?))
}

/// `B̃_{σ,j}`: `M_{σ,j}` for even `j`, `sqrt(M_{σ,j-1} M_{σ,j+1})` for odd `j`.
pub fn moment_btilde<T: Real>(sigma: T, j: usize) -> Result<Saturating<T>> {
    Ok(Saturating::from_ln(ln_moment_btilde(sigma, j)?))
}

pub(crate) fn ln_moment_for_c<T: Real>(c: T, k: usize) -> T {
    match k {
        0 => T::zero(),
        1 => T::neg_infinity(),
        _ if c == T::zero() => T::neg_infinity(),
        2 => c.exp_m1().ln(),
        _ => {
            if direct_is_stable(c, k) {
                let d = ln_moment_direct(c, k);
                if d.sign() > 0 {
                    return d.log_magnitude();
                }
            }
            ln_moment_series(c, k)
        }
    }
}

/// The leading binomial term dominates once `k e^{-c(k-1)} <= 1/4`.
fn direct_is_stable<T: Real>(c: T, k: usize) -> bool {
    c * lit::<T>((k - 1) as f64) >= lit::<T>(4.0 * k as f64).ln()
}

/// Alternating binomial sum, highest order first.
pub(crate) fn ln_moment_direct<T: Real>(c: T, k: usize) -> SignedLog<T> {
    let mut terms = Vec::with_capacity(k);
    for l in (2..=k).rev() {
        let sign = if (k - l).is_multiple_of(2) { 1 } else { -1 };
        let ln_mag = ln_binomial::<T>(k, l) + c * lit::<T>((l * (l - 1)) as f64) * lit(0.5);
        terms.push(SignedLog::from_parts(sign, ln_mag));
    }
    let tail = lit::<T>((k - 1) as f64);
    let tail = if k.is_multiple_of(2) { -tail } else { tail };
    terms.push(SignedLog::from_real(tail));
    signed_log::sum(&terms)
}

/// Positive series; every `t_j^{(n)}` is kept in log form.
pub(crate) fn ln_moment_series<T: Real>(c: T, k: usize) -> T {
    let ln_half_c = (c * lit(0.5)).ln();
    let ln_two_jm1: Vec<T> = (0..=k)
        .map(|j| if j >= 2 { lit::<T>(2.0 * (j - 1) as f64).ln() } else { T::neg_infinity() })
        .collect();
    let ln_j_jm1: Vec<T> = (0..=k)
        .map(|j| if j >= 2 { lit::<T>((j * (j - 1)) as f64).ln() } else { T::neg_infinity() })
        .collect();
    let growth = c * lit::<T>(0.5) * lit::<T>((k * k + k - 1) as f64);
    let tol = T::epsilon().ln() - lit(5.0);
    let ln_two = lit::<T>(2.0).ln();

    let mut cur = vec![T::neg_infinity(); k + 1];
    cur[0] = T::zero();
    let mut next = vec![T::neg_infinity(); k + 1];
    let mut ln_total = T::neg_infinity();
    let mut n = 0usize;
    loop {
        let ln_scale = ln_half_c - lit::<T>((n + 1) as f64).ln();
        for j in 0..=k {
            next[j] = if j < 2 {
                T::neg_infinity()
            } else {
                let a = cur[j - 2];
                let b = ln_two_jm1[j] + cur[j - 1];
                let d = ln_j_jm1[j] + cur[j];
                ln_scale + log_sum_exp(&[a, b, d])
            };
        }
        std::mem::swap(&mut cur, &mut next);
        n += 1;
        ln_total = log_add_exp(ln_total, cur[k]);
        // Future mass is bounded by twice the current l1 norm once the growth ratio is <= 1/2.
        if ln_total > T::neg_infinity() && growth / lit::<T>((n + 1) as f64) <= lit(0.5) {
            let ln_norm = log_sum_exp(&cur);
            if ln_norm + ln_two < ln_total + tol {
                break;
            }
        }
        if n > 10_000_000 {
            break;
        }
    }
    ln_factorial::<T>(k) + ln_total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(sigma: f64, k: usize) -> (f64, f64) {
        let mut s = 0.0f64;
        let mut abs = 0.0f64;
        for l in 2..=k {
            let sign = if (k - l).is_multiple_of(2) { 1.0 } else { -1.0 };
            let binom = statrs::function::factorial::binomial(k as u64, l as u64);
            let t = sign * binom * (2.0 * (l * (l - 1)) as f64 / (sigma * sigma)).exp();
            s += t;
            abs += t.abs();
        }
        let tail = if k.is_multiple_of(2) { -((k - 1) as f64) } else { (k - 1) as f64 };
        (s + tail, abs + tail.abs())
    }

    #[test]
    fn low_orders() {
        assert_eq!(moment_m(3.0f64, 0).unwrap().value, 1.0);
        assert_eq!(moment_m(3.0f64, 1).unwrap().value, 0.0);
        let m2 = moment_m(6.0f64, 2).unwrap().value;
        assert!((m2 - (4.0f64 / 36.0).exp_m1()).abs() < 1e-16);
        assert!((m2 - 0.117_519_0).abs() < 1e-7);
    }

    #[test]
    fn series_and_direct_agree_in_overlap() {
        for &k in &[3usize, 4, 5, 8, 12, 20, 40, 80] {
            let threshold = (4.0 * k as f64).ln() / (k - 1) as f64;
            for &f in &[1.0, 1.5, 3.0] {
                let c = threshold * f;
                let d = ln_moment_direct(c, k);
                assert_eq!(d.sign(), 1);
                let s = ln_moment_series(c, k);
                let rel = (d.log_magnitude() - s).exp_m1().abs();
                assert!(rel < 1e-11, "k={k} c={c} rel={rel}");
            }
        }
    }

    #[test]
    fn agrees_with_naive_where_well_conditioned() {
        for sigma in [1.0f64, 1.5, 2.0, 3.0, 4.0, 6.0, 10.0] {
            for k in 2..=14 {
                let (v, abs) = naive(sigma, k);
                if !v.is_finite() || v.abs() <= 1e-12 || abs / v.abs() * f64::EPSILON > 1e-11 {
                    continue;
                }
                let got = moment_m(sigma, k).unwrap().value;
                assert!(((got - v) / v).abs() < 1e-10, "sigma={sigma} k={k}: {got} vs {v}");
            }
        }
    }

    #[test]
    fn btilde_odd_is_geometric_mean() {
        let m2 = moment_m(6.0f64, 2).unwrap().value;
        let m4 = moment_m(6.0f64, 4).unwrap().value;
        let b3 = moment_btilde(6.0f64, 3).unwrap().value;
        assert!((b3 - (m2 * m4).sqrt()).abs() < 1e-15 * b3);
        assert_eq!(
            moment_btilde(6.0f64, 2).unwrap().value,
            moment_m(6.0f64, 2).unwrap().value
        );
    }

    #[test]
    fn overflow_saturates_with_flag() {
        let r = moment_m(1.0f64, 200).unwrap();
        assert!(r.value.is_infinite() && r.saturated);
        assert!(ln_moment_m(1.0f64, 200).unwrap().is_finite());
        assert!(!moment_m(6.0f64, 4).unwrap().saturated);
    }

    #[test]
    fn rejects_non_positive_sigma() {
        assert!(moment_m(0.0f64, 2).is_err());
        assert!(moment_m(-1.0f64, 2).is_err());
        assert!(moment_btilde(1.0f64, 0).is_err());
    }

    #[test]
    fn f32_matches_f64() {
        for k in [2usize, 3, 4, 7, 10] {
            let a = moment_m(5.0f32, k).unwrap().value as f64;
            let b = moment_m(5.0f64, k).unwrap().value;
            assert!(((a - b) / b).abs() < 1e-4, "k={k}");
        }
    }
}
