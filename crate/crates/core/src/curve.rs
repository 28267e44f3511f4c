//! Shared accountant types: subsampling parameters, configurations and RDP curves.

use crate::error::{domain, Result};
use crate::real::{lit, log1p_exp, pairwise_sum, Real};
use crate::signed_log::SignedLog;
use rayon::prelude::*;

/// Neighbouring-dataset relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Adjacency {
    AddRemove,
    ReplaceOne,
}

/// Minibatch sampling scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplingMode {
    Poisson,
    WithoutReplacement,
    WithReplacement,
}

/// Batch size `|B|` and dataset size `|D|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubsamplingSpec {
    pub batch: usize,
    pub dataset: usize,
}

impl SubsamplingSpec {
    /// Requires `1 <= |B| < |D|`.
    pub fn new(batch: usize, dataset: usize) -> Result<Self> {
        if batch == 0 || batch >= dataset {
            return domain(format!(
                "need 1 <= batch < dataset, got batch={batch} dataset={dataset}"
            ));
        }
        Ok(Self { batch, dataset })
    }

    /// Sampling rate `q = |B|/|D|`.
    pub fn q<T: Real>(&self) -> T {
        lit::<T>(self.batch as f64) / lit::<T>(self.dataset as f64)
    }
}

/// Everything needed to build a T-step curve.
#[derive(Debug, Clone, PartialEq)]
pub struct AccountantConfig<T> {
    pub spec: SubsamplingSpec,
    /// Noise multiplier per step; its length is the step count.
    pub sigmas: Vec<T>,
    pub taylor_order: usize,
    pub adjacency: Adjacency,
    pub alpha_grid: Vec<T>,
}

impl<T: Real> AccountantConfig<T> {
    pub fn new(
        spec: SubsamplingSpec,
        sigmas: Vec<T>,
        taylor_order: usize,
        adjacency: Adjacency,
        alpha_grid: Vec<T>,
    ) -> Result<Self> {
        let cfg = Self {
            spec,
            sigmas,
            taylor_order,
            adjacency,
            alpha_grid,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Constant noise multiplier over `steps` steps.
    pub fn constant(
        spec: SubsamplingSpec,
        sigma: T,
        steps: usize,
        taylor_order: usize,
        adjacency: Adjacency,
        alpha_grid: Vec<T>,
    ) -> Result<Self> {
        Self::new(spec, vec![sigma; steps], taylor_order, adjacency, alpha_grid)
    }

    pub fn steps(&self) -> usize {
        self.sigmas.len()
    }

    pub fn validate(&self) -> Result<()> {
        SubsamplingSpec::new(self.spec.batch, self.spec.dataset)?;
        if self.sigmas.is_empty() {
            return domain("at least one step is required");
        }
        if let Some(s) = self.sigmas.iter().find(|s| !(**s > T::zero())) {
            return domain(format!("noise multipliers must be positive, got {s}"));
        }
        if self.taylor_order < 3 {
            return domain(format!("Taylor order must be >= 3, got {}", self.taylor_order));
        }
        validate_grid(&self.alpha_grid)
    }
}

pub(crate) fn validate_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return domain("alpha grid is empty");
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return domain("alpha grid must be strictly increasing");
        }
    }
    if let Some(a) = grid.iter().find(|a| !(**a > T::one()) || !a.is_finite()) {
        return domain(format!("every alpha must be finite and > 1, got {a}"));
    }
    Ok(())
}

/// `{1 + x/10 : x = 1..99} ∪ {2, ..., 256}`.
pub fn default_alpha_grid<T: Real>() -> Vec<T> {
    let mut grid: Vec<f64> = (1..=99).map(|x| 1.0 + x as f64 / 10.0).collect();
    grid.extend((11..=256).map(|a| a as f64));
    grid.iter().map(|&a| lit(a)).collect()
}

/// An RDP bound for a single Rényi order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epsilon<T> {
    pub value: T,
    /// The bound overflowed and was replaced by `+inf`.
    pub saturated: bool,
    /// Rounding produced a bracket below one; the value was clamped to zero.
    pub clamped: bool,
}

impl<T: Real> Epsilon<T> {
    pub fn zero() -> Self {
        Self {
            value: T::zero(),
            saturated: false,
            clamped: false,
        }
    }

    /// `ln(1 + S)/(α-1)` given `S` in signed log form.
    pub(crate) fn from_excess(excess: SignedLog<T>, alpha: T) -> Self {
        match excess.sign() {
            0 => Self::zero(),
            s if s < 0 => Self {
                value: T::zero(),
                saturated: false,
                clamped: true,
            },
            _ => {
                let lm = excess.log_magnitude();
                if lm.is_nan() || lm == T::infinity() {
                    return Self {
                        value: T::infinity(),
                        saturated: true,
                        clamped: false,
                    };
                }
                Self {
                    value: log1p_exp(lm) / (alpha - T::one()),
                    saturated: false,
                    clamped: false,
                }
            }
        }
    }
}

/// One `(α, ε)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdpPoint<T> {
    pub alpha: T,
    pub epsilon: T,
}

/// Map from Rényi order to an RDP bound.
#[derive(Debug, Clone, PartialEq)]
pub struct RdpCurve<T> {
    pub method: String,
    pub points: Vec<RdpPoint<T>>,
}

impl<T: Real> RdpCurve<T> {
    /// Requires strictly increasing orders above one and non-negative bounds.
    pub fn new(method: impl Into<String>, points: Vec<RdpPoint<T>>) -> Result<Self> {
        let alphas: Vec<T> = points.iter().map(|p| p.alpha).collect();
        validate_grid(&alphas)?;
        if let Some(p) = points.iter().find(|p| !(p.epsilon >= T::zero())) {
            return domain(format!("negative or NaN epsilon at alpha {}", p.alpha));
        }
        Ok(Self {
            method: method.into(),
            points,
        })
    }

    pub fn from_pairs(method: impl Into<String>, pairs: &[(T, T)]) -> Result<Self> {
        Self::new(
            method,
            pairs
                .iter()
                .map(|&(alpha, epsilon)| RdpPoint { alpha, epsilon })
                .collect(),
        )
    }

    pub fn epsilon_at(&self, alpha: T) -> Option<T> {
        self.points.iter().find(|p| p.alpha == alpha).map(|p| p.epsilon)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Sums per-step bounds over a noise schedule for every grid order.
///
/// Each distinct `σ` is evaluated once per order. A constant schedule is scaled by the step
/// count; otherwise per-step values are combined by pairwise summation in step order.
pub(crate) fn compose_with<T, F>(
    method: &str,
    alphas: &[T],
    sigmas: &[T],
    step: F,
) -> Result<RdpCurve<T>>
where
    T: Real,
    F: Fn(T, T) -> Result<Epsilon<T>> + Sync,
{
    validate_grid(alphas)?;
    if sigmas.is_empty() {
        return domain("at least one step is required");
    }
    let mut distinct: Vec<T> = Vec::new();
    let index: Vec<usize> = sigmas
        .iter()
        .map(|s| match distinct.iter().position(|d| d == s) {
            Some(i) => i,
            None => {
                distinct.push(*s);
                distinct.len() - 1
            }
        })
        .collect();
    let points = alphas
        .par_iter()
        .map(|&alpha| {
            let per_sigma = distinct
                .iter()
                .map(|&s| step(alpha, s).map(|e| e.value))
                .collect::<Result<Vec<T>>>()?;
            let epsilon = if per_sigma.iter().any(|v| v.is_infinite()) {
                T::infinity()
            } else if per_sigma.len() == 1 {
                per_sigma[0] * lit(sigmas.len() as f64)
            } else {
                let values: Vec<T> = index.iter().map(|&i| per_sigma[i]).collect();
                pairwise_sum(&values)
            };
            Ok(RdpPoint { alpha, epsilon })
        })
        .collect::<Result<Vec<_>>>()?;
    RdpCurve::new(method, points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let g = default_alpha_grid::<f64>();
        assert_eq!(g.len(), 99 + 246);
        assert!((g[0] - 1.1).abs() < 1e-15);
        assert_eq!(*g.last().unwrap(), 256.0);
        assert!(validate_grid(&g).is_ok());
    }

    #[test]
    fn spec_validation() {
        assert!(SubsamplingSpec::new(0, 10).is_err());
        assert!(SubsamplingSpec::new(10, 10).is_err());
        let s = SubsamplingSpec::new(120, 50000).unwrap();
        assert!((s.q::<f64>() - 0.0024).abs() < 1e-18);
    }

    #[test]
    fn curve_rejects_bad_grids() {
        assert!(RdpCurve::from_pairs("x", &[(2.0f64, 0.1), (2.0, 0.2)]).is_err());
        assert!(RdpCurve::from_pairs("x", &[(1.0f64, 0.1)]).is_err());
        assert!(RdpCurve::from_pairs("x", &[(2.0f64, -0.1)]).is_err());
        assert!(RdpCurve::<f64>::from_pairs("x", &[]).is_err());
        assert!(RdpCurve::from_pairs("x", &[(2.0f64, f64::INFINITY)]).is_ok());
    }

    #[test]
    fn compose_mixed_schedule_is_sum() {
        let c = compose_with("t", &[2.0f64, 3.0], &[1.0, 2.0, 1.0], |a, s| {
            Ok(Epsilon {
                value: a * s,
                saturated: false,
                clamped: false,
            })
        })
        .unwrap();
        assert_eq!(c.points[0].epsilon, 8.0);
        assert_eq!(c.points[1].epsilon, 12.0);
    }
}
