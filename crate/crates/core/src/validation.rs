//! Numbered acceptance checks and supplementary oracle checks, shared by the acceptance
//! test target and the `validate` command.

use crate::baselines::{poisson_replace_one_step, wang_lower, wang_upper};
use crate::conversion::{default_deltas, eps_approx, rdp_to_dp, ConversionVariant};
use crate::curve::{default_alpha_grid, AccountantConfig, Adjacency, SamplingMode, SubsamplingSpec};
use crate::fswor::{compose, h_upper, step_add_remove, step_replace_one};
use crate::fswr::{fswr_lower, fswr_loosened_lower, fswr_upper_step, TruncationScheme};
use crate::oracles::{
    brute_fswr_lower, brute_variance, exact_h_integer, mc_mixture_renyi, validate_fswor_decomposition,
    validate_fswr_decomposition, MixtureSpec,
};
use crate::variance::{var_fswor, var_fswr, var_poisson, Population};
use crate::{baselines, Rational};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: String,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{status}] {:>3} {}: {}", self.id, self.name, self.detail)
    }
}

/// Settings for the Monte-Carlo check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationOptions {
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            mc_samples: 1_000_000,
            seed: 20240601,
        }
    }
}

const REF_SIGMA: f64 = 6.0;
const REF_BATCH: usize = 120;
const REF_DATASET: usize = 50_000;
const REF_EPOCHS: usize = 250;

fn ref_q() -> f64 {
    REF_BATCH as f64 / REF_DATASET as f64
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn check(id: &str, name: &'static str, outcome: Result<String, String>) -> Check {
    match outcome {
        Ok(detail) => Check {
            id: id.to_string(),
            name,
            passed: true,
            detail,
        },
        Err(detail) => Check {
            id: id.to_string(),
            name,
            passed: false,
            detail,
        },
    }
}

type Outcome = Result<String, String>;

fn err<E: fmt::Display>(e: E) -> String {
    e.to_string()
}

fn factor_four() -> Outcome {
    let (alpha, sigma, q) = (2.0, 6.0, 1e-4);
    let w = wang_upper(alpha, sigma, q).map_err(err)?.value;
    let f = step_add_remove(alpha, sigma, q, 3).map_err(err)?.value;
    let ratio = w / f;
    let msg = format!("wang_upper/fswor_ar = {ratio:.6} at alpha=2, sigma=6, q=1e-4");
    if (3.96..=4.04).contains(&ratio) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn replace_one_ordering() -> Outcome {
    let q = ref_q();
    let mut worst_gap: f64 = 0.0;
    for a in 2..=64 {
        let alpha = a as f64;
        let lo = wang_lower(alpha, REF_SIGMA, q).map_err(err)?;
        let ro = step_replace_one(alpha, REF_SIGMA, q, 4).map_err(err)?.value;
        let hi = wang_upper(alpha, REF_SIGMA, q).map_err(err)?.value;
        if !(lo <= ro && ro <= hi) {
            return Err(format!("alpha={a}: lower={lo:e} fswor_ro={ro:e} upper={hi:e}"));
        }
        if a <= 32 {
            let frac = (ro - lo) / (hi - lo);
            worst_gap = worst_gap.max(frac);
            if frac > 0.25 {
                return Err(format!("alpha={a}: (ro-lower)/(upper-lower) = {frac:.4} > 0.25"));
            }
        }
    }
    Ok(format!(
        "wang_lower <= fswor_ro(m=4) <= wang_upper on alpha 2..64; max relative position {worst_gap:.4} on alpha <= 32"
    ))
}

fn poisson_below_lower() -> Outcome {
    let q = ref_q();
    for a in 2..=64 {
        let alpha = a as f64;
        let p = poisson_replace_one_step(alpha, REF_SIGMA, q, 4).map_err(err)?.value;
        let lo = wang_lower(alpha, REF_SIGMA, q).map_err(err)?;
        if p > lo {
            return Err(format!("alpha={a}: poisson_ro={p:e} > wang_lower={lo:e}"));
        }
    }
    Ok("poisson_ro(m=4) <= wang_lower on alpha 2..64".into())
}

fn integer_exactness() -> Outcome {
    let mut worst: f64 = 0.0;
    for a in 2..=8usize {
        for sigma in [2.0f64, 4.0, 6.0] {
            for q in [1e-3, 1e-2] {
                let h = h_upper(a as f64, sigma, q, a + 1).map_err(err)?.value;
                let exact = exact_h_integer(a, sigma, q).map_err(err)?;
                let r = rel_err(h, exact);
                worst = worst.max(r);
                if r > 1e-12 {
                    return Err(format!("alpha={a} sigma={sigma} q={q}: rel err {r:e}"));
                }
            }
        }
    }
    Ok(format!("h_upper(m=alpha+1) = exact H, max rel err {worst:.2e}"))
}

fn mc_soundness(opts: ValidationOptions) -> Outcome {
    let (sigma, q) = (4.0, 0.01);
    let mut lines = Vec::new();
    for a in 2..=6usize {
        let alpha = a as f64;
        let seed = opts.seed.wrapping_add(a as u64);
        let add = mc_mixture_renyi(alpha, &MixtureSpec::add_remove(q), sigma / 2.0, opts.mc_samples, seed).map_err(err)?;
        let exact = exact_h_integer(a, sigma, q).map_err(err)?;
        if (add.value - exact).abs() > 3.0 * add.std_error {
            return Err(format!("alpha={a}: add/remove MC {} vs exact {exact} (se {})", add.value, add.std_error));
        }
        let ar_bound = ((alpha - 1.0) * step_add_remove(alpha, sigma, q, 3).map_err(err)?.value).exp();
        if add.value - 3.0 * add.std_error > ar_bound {
            return Err(format!("alpha={a}: add/remove MC {} above bound {ar_bound}", add.value));
        }
        let ro_bound = ((alpha - 1.0) * step_replace_one(alpha, sigma, q, 4).map_err(err)?.value).exp();
        let wang = ((alpha - 1.0) * wang_upper(alpha, sigma, q).map_err(err)?.value).exp();
        for (label, mix) in [
            ("antiparallel", MixtureSpec::replace_one_antiparallel(q)),
            ("one-sided", MixtureSpec::replace_one_one_sided(q)),
        ] {
            let est = mc_mixture_renyi(alpha, &mix, sigma / 2.0, opts.mc_samples, seed).map_err(err)?;
            for (bound_name, bound) in [("fswor_ro", ro_bound), ("wang_upper", wang)] {
                if est.value - 3.0 * est.std_error > bound {
                    return Err(format!("alpha={a} {label}: MC {} above {bound_name} {bound}", est.value));
                }
            }
        }
        lines.push(format!("{a}:{:.2}se", (add.value - exact).abs() / add.std_error));
    }
    Ok(format!(
        "alpha 2..6, sigma=4, q=0.01, {} samples; |MC-exact| in std errors {}",
        opts.mc_samples,
        lines.join(" ")
    ))
}

fn fswr_sandwich() -> Outcome {
    let spec = SubsamplingSpec::new(REF_BATCH, REF_DATASET).map_err(err)?;
    for a in 2..=16usize {
        let alpha = a as f64;
        let lower = fswr_lower(alpha, REF_SIGMA, REF_BATCH, REF_DATASET, &TruncationScheme::standard(a, REF_BATCH))
            .map_err(err)?;
        let upper = fswr_upper_step(alpha, REF_SIGMA, &spec, 3).map_err(err)?.value;
        if !(lower <= upper) {
            return Err(format!("alpha={a}: lower {lower:e} > upper {upper:e}"));
        }
    }
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for batch in 1..=4usize {
        for a in 2..=4usize {
            for dataset in [2usize, 5, 10, 20] {
                for sigma in [1.0, 2.0, 6.0] {
                    let fast = fswr_lower(a as f64, sigma, batch, dataset, &TruncationScheme::full(a, batch)).map_err(err)?;
                    let brute = brute_fswr_lower(a, sigma, batch, dataset).map_err(err)?;
                    let r = rel_err(fast, brute);
                    worst = worst.max(r);
                    cases += 1;
                    if r > 1e-12 {
                        return Err(format!("B={batch} alpha={a} N={dataset} sigma={sigma}: rel err {r:e}"));
                    }
                }
            }
        }
    }
    Ok(format!(
        "fswr_lower <= fswr_upper on alpha 2..16; full truncation = brute force on {cases} cases, max rel err {worst:.2e}"
    ))
}

fn loosened_lower() -> Outcome {
    let (alpha, sigma, q) = (2.0f64, 6.0, 1e-3);
    let mut prev = f64::NEG_INFINITY;
    let mut values = Vec::new();
    for batch in [10usize, 100, 1000] {
        let dataset = batch * 1000;
        let lower = fswr_lower(alpha, sigma, batch, dataset, &TruncationScheme::standard(2, batch)).map_err(err)?;
        let loose = fswr_loosened_lower(alpha, sigma, batch, q);
        // At |B| = 1000 the two sides agree far below f64 resolution, so a few ulps are allowed.
        if lower < loose - 8.0 * f64::EPSILON * loose.abs() {
            return Err(format!("B={batch}: fswr_lower {lower} < loosened {loose}"));
        }
        if lower < prev {
            return Err(format!("B={batch}: fswr_lower {lower} decreased from {prev}"));
        }
        prev = lower;
        values.push(format!("{batch}:{lower:.6e}(gap {:.1e})", lower - loose));
    }
    Ok(format!("fswr_lower >= loosened form and non-decreasing in B ({})", values.join(" ")))
}

fn decomposition_validation() -> Outcome {
    let mut n = 0;
    for dataset in 1..=8usize {
        for batch in 1..=dataset {
            let r = validate_fswor_decomposition(dataset, batch).map_err(err)?;
            if !r.is_exact() {
                return Err(format!("without replacement D={dataset} B={batch}: {r:?}"));
            }
            n += 1;
        }
    }
    let mut m = 0;
    for dataset in 1..=6usize {
        for batch in 1..=4usize {
            let r = validate_fswr_decomposition(dataset, batch).map_err(err)?;
            if !r.is_exact() {
                return Err(format!("with replacement D={dataset} B={batch}: {r:?}"));
            }
            m += 1;
        }
    }
    Ok(format!("{n} without-replacement and {m} with-replacement cases exact"))
}

fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Fixed grid of 50 small populations with rational entries.
pub fn variance_grid() -> Vec<(Vec<Rational>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    (0..50)
        .map(|i| {
            let d = 2 + i % 5;
            let b = 1 + (i / 5) % d;
            let values = (0..d)
                .map(|_| rational(rng.random_range(-20..=20), rng.random_range(1..=6)))
                .collect();
            (values, b)
        })
        .collect()
}

fn variance_algebra() -> Outcome {
    let mut worst: f64 = 0.0;
    for (values, batch) in variance_grid() {
        let pop = Population::new(values.clone()).map_err(err)?;
        let closed = [
            (SamplingMode::Poisson, var_poisson(&pop, batch).map_err(err)?),
            (SamplingMode::WithoutReplacement, var_fswor(&pop, batch).map_err(err)?),
            (SamplingMode::WithReplacement, var_fswr(&pop, batch).map_err(err)?),
        ];
        let floats: Vec<f64> = values.iter().map(|v| num_traits::ToPrimitive::to_f64(v).unwrap()).collect();
        let fpop = Population::new(floats).map_err(err)?;
        let fclosed = [
            var_poisson(&fpop, batch).map_err(err)?,
            var_fswor(&fpop, batch).map_err(err)?,
            var_fswr(&fpop, batch).map_err(err)?,
        ];
        for ((mode, exact), approx) in closed.into_iter().zip(fclosed) {
            let brute = brute_variance(&values, batch, mode).map_err(err)?;
            if brute != exact {
                return Err(format!("{mode:?} D={} B={batch}: closed {exact} != enumeration {brute}", values.len()));
            }
            let reference = num_traits::ToPrimitive::to_f64(&brute).unwrap();
            let r = rel_err(approx, reference);
            if reference.abs() > 0.0 && r > 1e-12 {
                return Err(format!("{mode:?} D={} B={batch}: float rel err {r:e}", values.len()));
            }
            if reference.abs() > 0.0 {
                worst = worst.max(r);
            }
        }
    }
    let triple = Population::new(vec![rational(1, 1), rational(2, 1), rational(3, 1)]).map_err(err)?;
    let got = (
        var_poisson(&triple, 2).map_err(err)?,
        var_fswor(&triple, 2).map_err(err)?,
        var_fswr(&triple, 2).map_err(err)?,
    );
    if got != (rational(7, 9), rational(1, 6), rational(1, 3)) {
        return Err(format!("worked triple gave {got:?}"));
    }
    Ok(format!(
        "50 populations exact vs enumeration, float max rel err {worst:.2e}; triple = (7/9, 1/6, 1/3)"
    ))
}

fn conversion_comparison() -> Outcome {
    let spec = SubsamplingSpec::new(REF_BATCH, REF_DATASET).map_err(err)?;
    let steps = REF_EPOCHS * REF_DATASET.div_ceil(REF_BATCH);
    let grid = default_alpha_grid::<f64>();
    let curve = |m: usize| {
        AccountantConfig::constant(spec, REF_SIGMA, steps, m, Adjacency::ReplaceOne, grid.clone())
            .and_then(|cfg| compose(&cfg))
    };
    let ro4 = curve(4).map_err(err)?;
    let ro5 = curve(5).map_err(err)?;
    let wang = baselines::compose_wang_upper(&grid, &vec![REF_SIGMA; steps], ref_q()).map_err(err)?;
    let mut worst: f64 = 0.0;
    let mut shown = Vec::new();
    for delta in default_deltas::<f64>() {
        let e4 = rdp_to_dp(&ro4, delta, ConversionVariant::Improved).map_err(err)?.epsilon;
        let e5 = rdp_to_dp(&ro5, delta, ConversionVariant::Improved).map_err(err)?.epsilon;
        let ew = rdp_to_dp(&wang, delta, ConversionVariant::Improved).map_err(err)?.epsilon;
        if !(e4 < ew) {
            return Err(format!("delta={delta:e}: fswor_ro {e4} not below wang_upper {ew}"));
        }
        if !e4.is_finite() {
            return Err(format!("delta={delta:e}: epsilon {e4} is not finite"));
        }
        let r = rel_err(e4, e5);
        worst = worst.max(r);
        if r > 1e-2 {
            return Err(format!("delta={delta:e}: m=4 {e4} vs m=5 {e5}"));
        }
        shown.push(format!("{delta:e}:{e4:.3}/{ew:.3}"));
    }
    Ok(format!(
        "T={steps}; eps fswor_ro/wang_upper {}; m=4 vs m=5 max rel diff {worst:.2e}",
        shown.join(" ")
    ))
}

fn approx_relation() -> Outcome {
    let (sigma, q, t) = (6.0f64, ref_q(), 104_250.0);
    for delta in default_deltas::<f64>() {
        let r_p = t * q * q / (2.0 * sigma * sigma);
        let e_p = eps_approx(r_p, delta);
        let e_fs = eps_approx(4.0 * r_p, delta);
        if e_fs != 2.0 * e_p {
            return Err(format!("delta={delta:e}: {e_fs} != 2 * {e_p}"));
        }
    }
    Ok("eps_approx(4R) == 2 eps_approx(R) bit-for-bit on all default deltas".into())
}

/// The eleven numbered acceptance criteria.
pub fn acceptance_checks(opts: ValidationOptions) -> Vec<Check> {
    vec![
        check("1", "factor-4 leading order", factor_four()),
        check("2", "replace-one ordering", replace_one_ordering()),
        check("3", "Poisson below Wang lower", poisson_below_lower()),
        check("4", "integer-order exactness", integer_exactness()),
        check("5", "Monte-Carlo soundness", mc_soundness(opts)),
        check("6", "with-replacement sandwich", fswr_sandwich()),
        check("7", "loosened with-replacement bound", loosened_lower()),
        check("8", "sampling decompositions", decomposition_validation()),
        check("9", "variance algebra", variance_algebra()),
        check("10", "(eps, delta) comparison", conversion_comparison()),
        check("11", "approximate epsilon relation", approx_relation()),
    ]
}

fn soundness_vs_exact() -> Outcome {
    for a in 2..=8usize {
        for sigma in [2.0f64, 4.0, 6.0] {
            for q in [1e-3, 1e-2] {
                let exact = exact_h_integer(a, sigma, q).map_err(err)?.ln() / (a - 1) as f64;
                for m in 3..=a + 1 {
                    let e = step_add_remove(a as f64, sigma, q, m).map_err(err)?.value;
                    if e < exact * (1.0 - 1e-12) {
                        return Err(format!("alpha={a} sigma={sigma} q={q} m={m}: {e:e} < exact {exact:e}"));
                    }
                }
            }
        }
    }
    Ok("fswor_ar >= exact integer-order value for every m in 3..=alpha+1".into())
}

fn weights_normalised() -> Outcome {
    for (batch, dataset) in [(1usize, 2usize), (10, 1000), (120, 50_000), (500, 501)] {
        let w = crate::fswr::FswrWeights::<f64>::new(batch, dataset).map_err(err)?;
        let st: f64 = w.a_tilde.iter().sum();
        let sa: f64 = w.a.iter().sum();
        if (st - 1.0).abs() > 1e-12 || (sa - 1.0).abs() > 1e-12 {
            return Err(format!("B={batch} D={dataset}: sums {st} and {sa}"));
        }
    }
    Ok("with-replacement weights sum to one".into())
}

/// Acceptance criteria plus supplementary oracle checks.
pub fn all_checks(opts: ValidationOptions) -> Vec<Check> {
    let mut checks = acceptance_checks(opts);
    checks.push(check("S1", "add/remove soundness vs exact", soundness_vs_exact()));
    checks.push(check("S2", "weight normalisation", weights_normalised()));
    checks
}
