//! RDP to `(ε, δ)`-DP conversion over a finite order grid.

use crate::curve::RdpCurve;
use crate::error::{domain, Result};
use crate::real::{lit, Real};

/// Conversion rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConversionVariant {
    /// `ε'(α) + ln(1/δ)/(α-1)`.
    Classic,
    /// `ε'(α) + ln((α-1)/α) - (ln δ + ln α)/(α-1)` (Balle et al. 2020, Theorem 21).
    Improved,
}

impl ConversionVariant {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Classic => "classic",
            Self::Improved => "improved",
        }
    }
}

/// An `(ε, δ)` guarantee and the order that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct DpGuarantee<T> {
    pub epsilon: T,
    pub delta: T,
    /// `None` when every curve point was infinite.
    pub alpha_star: Option<T>,
    pub variant: ConversionVariant,
}

/// Converted `ε` for a single order.
pub fn convert_point<T: Real>(alpha: T, rdp: T, delta: T, variant: ConversionVariant) -> T {
    let am1 = alpha - T::one();
    match variant {
        ConversionVariant::Classic => rdp - delta.ln() / am1,
        ConversionVariant::Improved => rdp + (am1 / alpha).ln() - (delta.ln() + alpha.ln()) / am1,
    }
}

/// Minimises the conversion over the curve; ties go to the smaller order.
/// The result is floored at zero.
pub fn rdp_to_dp<T: Real>(curve: &RdpCurve<T>, delta: T, variant: ConversionVariant) -> Result<DpGuarantee<T>> {
    if curve.is_empty() {
        return domain("cannot convert an empty curve");
    }
    if !(delta > T::zero() && delta < T::one()) {
        return domain(format!("delta must lie in (0, 1), got {delta}"));
    }
    let mut best: Option<(T, T)> = None;
    for p in curve.points.iter().filter(|p| p.epsilon.is_finite()) {
        let e = convert_point(p.alpha, p.epsilon, delta, variant);
        if best.is_none_or(|(_, b)| e < b) {
            best = Some((p.alpha, e));
        }
    }
    Ok(match best {
        Some((alpha, e)) => DpGuarantee {
            epsilon: e.max(T::zero()),
            delta,
            alpha_star: Some(alpha),
            variant,
        },
        None => DpGuarantee {
            epsilon: T::infinity(),
            delta,
            alpha_star: None,
            variant,
        },
    })
}

/// Leading-order approximation `2 sqrt(ln(1/δ) R)` for curves `ε'(α) ≈ αR`.
/// Not a guarantee.
pub fn eps_approx<T: Real>(r: T, delta: T) -> T {
    lit::<T>(2.0) * ((T::one() / delta).ln() * r).sqrt()
}

/// Default `δ` list `{1e-4, ..., 1e-10}`.
pub fn default_deltas<T: Real>() -> Vec<T> {
    (4..=10).map(|e| lit(10f64.powi(-e))).collect()
}
