//! Worked examples checked against values frozen from a 50-digit independent evaluation.
#![allow(clippy::excessive_precision)]

use fsrdp::fswr::FswrSplit;
use fsrdp::oracles::{exact_h_integer, validate_fswor_decomposition, validate_fswr_decomposition};
use fsrdp::*;

fn close(got: f64, want: f64, rel: f64) {
    assert!(
        (got - want).abs() <= rel * want.abs(),
        "got {got:e}, want {want:e} (rel tol {rel:e})"
    );
}

const M2_SIGMA6: f64 = 0.117_519_068_741_863_64;
const M4_SIGMA6: f64 = 0.070_398_753_161_499_63;
const BT3_SIGMA6: f64 = 0.090_957_110_289_013_5;

#[test]
fn low_order_moments() {
    for sigma in [0.5f64, 2.0, 6.0, 40.0] {
        assert_eq!(moment_m(sigma, 0).unwrap().value, 1.0);
        assert_eq!(moment_m(sigma, 1).unwrap().value, 0.0);
    }
    close(moment_m(6.0f64, 2).unwrap().value, M2_SIGMA6, 1e-14);
    close(moment_m(6.0f64, 4).unwrap().value, M4_SIGMA6, 1e-12);
}

#[test]
fn btilde_examples() {
    close(moment_btilde(6.0f64, 2).unwrap().value, M2_SIGMA6, 1e-14);
    close(moment_btilde(6.0f64, 3).unwrap().value, BT3_SIGMA6, 1e-12);
    assert!(moment_btilde(1e6f64, 2).unwrap().value < 1e-11);
}

#[test]
fn h_upper_examples() {
    assert_eq!(h_upper(3.7f64, 6.0, 0.0, 3).unwrap().value, 1.0);
    close(h_upper(2.0f64, 6.0, 0.1, 3).unwrap().value, 1.001_175_190_687_418_7, 1e-15);
    close(h_upper(3.0f64, 4.0, 0.05, 4).unwrap().value, 1.002_163_306_095_976_7, 1e-15);
    close(
        h_upper(3.0f64, 4.0, 0.05, 4).unwrap().value,
        exact_h_integer(3, 4.0f64, 0.05).unwrap(),
        1e-15,
    );
    assert!(h_upper(2.0f64, 6.0, 1.0, 3).is_err());
}

const AR_STEP: f64 = 6.769_096_068_497_75e-7;

#[test]
fn add_remove_step_examples() {
    let q = 120.0 / 50_000.0;
    let e3 = step_add_remove(2.0f64, 6.0, q, 3).unwrap().value;
    close(e3, AR_STEP, 1e-12);
    assert_eq!(step_add_remove(2.0f64, 6.0, q, 4).unwrap().value, e3);
    assert_eq!(step_add_remove(5.5f64, 3.0, 0.0, 3).unwrap().value, 0.0);
}

const RO_COEFFICIENT: f64 = 0.060_391_323_981_627_186;
const POISSON_COEFFICIENT: f64 = 0.055_562_700_321_365_996;

#[test]
fn replace_one_examples() {
    assert_eq!(step_replace_one(4.0f64, 6.0, 0.0, 4).unwrap().value, 0.0);
    let q = 1e-4f64;
    let leading = q * q * 2.0 * RO_COEFFICIENT;
    let step = step_replace_one(2.0f64, 6.0, q, 4).unwrap().value;
    let bracket_excess = step.exp_m1();
    assert!(bracket_excess >= leading);
    assert!(bracket_excess <= leading * (1.0 + 1e-3));
}

#[test]
fn poisson_coefficient_ratio() {
    close(RO_COEFFICIENT / POISSON_COEFFICIENT, 1.086_904_049_521_229, 1e-15);
    // Both second-order terms tend to 2q²α(α-1)/σ² as σ grows, and so do the steps.
    let (alpha, q, sigma) = (3.0f64, 1e-5, 200.0);
    let fs = step_replace_one(alpha, sigma, q, 4).unwrap().value;
    let po = poisson_replace_one_step(alpha, sigma, q, 4).unwrap().value;
    let lead = 2.0 * q * q * alpha / (sigma * sigma);
    close(fs, lead, 1e-3);
    close(po, lead, 1e-3);
}

#[test]
fn fswr_examples() {
    close(FswrWeights::<f64>::new(120, 50_000).unwrap().q_tilde, 2.397_146_245_406_278_4e-3, 1e-14);
    let single = SubsamplingSpec::new(1, 500).unwrap();
    let w = FswrWeights::<f64>::new(1, 500).unwrap();
    assert_eq!(w.a_tilde.len(), 1);
    close(w.a_tilde[0], 1.0, 1e-15);
    close(w.q_tilde, 1.0 / 500.0, 1e-15);
    for alpha in [1.5f64, 2.0, 7.25] {
        close(
            fswr_upper_step(alpha, 6.0, &single, 3).unwrap().value,
            step_add_remove(alpha, 6.0, 1.0 / 500.0, 3).unwrap().value,
            1e-12,
        );
    }
    let spec = SubsamplingSpec::new(60, 25_000).unwrap();
    let fs = fswr_upper_step(2.0f64, 6.0, &spec, 3).unwrap().value;
    let wor = step_add_remove(2.0f64, 6.0, spec.q(), 3).unwrap().value;
    assert!((fs / wor - 1.0).abs() < 0.01, "{fs:e} vs {wor:e}");
    assert!(fswr_upper_step(2.0f64, 6.0, &spec, 3).is_ok());
    assert!(SubsamplingSpec::new(50, 50).is_err());
}

#[test]
fn fswr_upper_at_large_batch_is_dominated_by_full_collision() {
    // The n = |B| term carries e^{4|B|²/σ²}; at |B| = 120 it outweighs the O(q) weight.
    let spec = SubsamplingSpec::new(120, 50_000).unwrap();
    let fs = fswr_upper_step(2.0f64, 6.0, &spec, 3).unwrap().value;
    let wor = step_add_remove(2.0f64, 6.0, spec.q(), 3).unwrap().value;
    assert!(fs > 1e6 * wor);
}

#[test]
fn alternate_split_is_admissible() {
    let spec = SubsamplingSpec::new(10, 1000).unwrap();
    let split = FswrSplit::<f64>::standard(&spec);
    assert!(split.validate(&spec).is_ok());
    let bad = FswrSplit {
        k: 2,
        q_tilde: FswrSplit::<f64>::min_q_tilde(&spec, 2) * 0.5,
    };
    assert!(bad.validate(&spec).is_err());
}

const FSWR_LOWER_SMALL: f64 = 4.748_145_798_871_693e-3;

#[test]
fn fswr_lower_examples() {
    let full = TruncationScheme::full(2, 2);
    close(fswr_lower(2.0f64, 6.0, 2, 10, &full).unwrap(), FSWR_LOWER_SMALL, 1e-13);
    close(FSWR_LOWER_SMALL.exp(), 1.004_759_436_105_403, 1e-15);
    assert!(fswr_lower(2.0f64, 1e5, 2, 10, &full).unwrap().abs() < 1e-9);
    let q = 120.0 / 50_000.0;
    let lower = fswr_lower(2.0f64, 6.0, 120, 50_000, &TruncationScheme::standard(2, 120)).unwrap();
    let loose = fswr_loosened_lower(2.0f64, 6.0, 120, q);
    close(loose, -996.746_788_258_468, 1e-13);
    assert!(lower >= loose);
}

const WANG_UPPER_AR: f64 = 2.707_635_678_163_747_3e-6;

#[test]
fn wang_examples() {
    let q = 120.0 / 50_000.0;
    close(wang_upper(2.0f64, 6.0, q).unwrap().value, WANG_UPPER_AR, 1e-12);
    close(WANG_UPPER_AR / AR_STEP, 4.0, 1e-2);
    assert_eq!(wang_upper(9.0f64, 6.0, 0.0).unwrap().value, 0.0);
    assert_eq!(wang_lower(9.0f64, 6.0, 0.0).unwrap(), 0.0);
    let lo2 = wang_lower(2.0f64, 6.0, q).unwrap();
    close(lo2, 6.769_096_068_497_75e-7, 1e-12);
    assert!(lo2 <= step_replace_one(2.0f64, 6.0, q, 4).unwrap().value);
    let lo64 = wang_lower(64.0f64, 6.0, q).unwrap();
    close(lo64, 2.206_375_429_039_982_6e-5, 1e-12);
    assert!(lo64 <= step_replace_one(64.0f64, 6.0, q, 4).unwrap().value);
}

#[test]
fn conversion_examples() {
    let c = RdpCurve::from_pairs("x", &[(2.0f64, 1.0)]).unwrap();
    let g = rdp_to_dp(&c, 1e-5, ConversionVariant::Classic).unwrap();
    close(g.epsilon, 12.512_925_464_970_229, 1e-15);
    assert_eq!(g.alpha_star, Some(2.0));
    let d = 1e-6f64;
    close(eps_approx((1.0 / d).ln(), d), 2.0 * (1.0 / d).ln(), 1e-15);
}

#[test]
fn decomposition_examples() {
    let r = validate_fswor_decomposition(6, 3).unwrap();
    assert!(r.is_exact());
    assert_eq!(r.outcomes, 20);
    assert_eq!(r.expected, Rational::new(1.into(), 20.into()));
    for d in 1..=6 {
        let r = validate_fswr_decomposition(d, 1).unwrap();
        assert!(r.is_exact());
        assert_eq!(r.outcomes, d);
    }
    assert!(validate_fswor_decomposition(9, 2).is_err());
    assert!(validate_fswr_decomposition(7, 2).is_err());
}

#[test]
fn exact_h_examples() {
    close(exact_h_integer(2, 6.0f64, 0.1).unwrap(), 1.001_175_190_687_418_7, 1e-15);
    assert_eq!(exact_h_integer(4, 6.0f64, 0.0).unwrap(), 1.0);
    close(exact_h_integer(4, 6.0f64, 1.0).unwrap(), (24.0f64 / 36.0).exp(), 1e-14);
}
