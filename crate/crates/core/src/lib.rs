//! Rényi-DP accounting for DP-SGD with fixed-size subsampling, with and without
//! replacement, plus Poisson and general-purpose baselines, `(ε, δ)` conversion,
//! minibatch variance formulas and exact or Monte-Carlo reference oracles.
//!
//! The numerical core is generic over [`Real`] (`f32`, `f64`); the variance formulas
//! and the enumeration oracles also run over exact rationals.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod conversion;
pub mod curve;
pub mod error;
pub mod fswor;
pub mod fswr;
pub mod moments;
pub mod oracles;
pub mod real;
pub mod signed_log;
pub mod validation;
pub mod variance;

pub use baselines::{compose_poisson, compose_wang_lower, compose_wang_upper, poisson_replace_one_step, wang_lower, wang_upper};
pub use conversion::{convert_point, default_deltas, eps_approx, rdp_to_dp, ConversionVariant, DpGuarantee};
pub use curve::{
    default_alpha_grid, AccountantConfig, Adjacency, Epsilon, RdpCurve, RdpPoint, SamplingMode, SubsamplingSpec,
};
pub use error::{Error, Result};
pub use fswor::{compose, h_upper, step_add_remove, step_replace_one};
pub use fswr::{compose_fswr, compose_fswr_lower, fswr_lower, fswr_loosened_lower, fswr_upper_step, FswrSplit, FswrWeights, TruncationScheme};
pub use moments::{ln_moment_btilde, ln_moment_m, moment_btilde, moment_m};
pub use real::{Real, Saturating};
pub use signed_log::SignedLog;
pub use variance::{var_fswor, var_fswr, var_poisson, variance_ratios, Population, VarianceRatios};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;

pub type RdpCurveF64 = RdpCurve<f64>;
pub type RdpCurveF32 = RdpCurve<f32>;
pub type AccountantConfigF64 = AccountantConfig<f64>;
pub type AccountantConfigF32 = AccountantConfig<f32>;
pub type EpsilonF64 = Epsilon<f64>;
pub type SignedLogF64 = SignedLog<f64>;
pub type DpGuaranteeF64 = DpGuarantee<f64>;
pub type PopulationF64 = Population<f64>;
pub type PopulationExact = Population<Rational>;
