//! Independent references: exact integer-order divergences, Monte-Carlo mixture
//! divergences, exhaustive checks of the two sampling decompositions, and brute-force
//! versions of the with-replacement lower bound and the subsampling variances.

use crate::curve::SamplingMode;
use crate::error::{domain, Result};
use crate::real::{ln_binomial, lit, log1p_exp, log_sum_exp, Real};
use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// `H_{α,σ}(q) = Σ_k C(α,k) q^k (1-q)^{α-k} e^{2k(k-1)/σ²}` for integer `α`.
pub fn exact_h_integer<T: Real>(alpha: usize, sigma: T, q: T) -> Result<T> {
    Ok(ln_exact_h_integer(alpha, sigma, q)?.exp())
}

/// Natural log of [`exact_h_integer`], as `ln(1 + Σ_{k>=2} C(α,k) q^k (1-q)^{α-k} (e^{2k(k-1)/σ²} - 1))`.
pub fn ln_exact_h_integer<T: Real>(alpha: usize, sigma: T, q: T) -> Result<T> {
    if alpha < 2 {
        return domain(format!("exact moment needs an integer order >= 2, got {alpha}"));
    }
    if !(sigma > T::zero()) || !(q >= T::zero() && q <= T::one()) {
        return domain("need sigma > 0 and q in [0, 1]");
    }
    if q == T::zero() {
        return Ok(T::zero());
    }
    let c = lit::<T>(2.0) / (sigma * sigma);
    let terms: Vec<T> = (2..=alpha)
        .map(|k| {
            let l1 = if k == alpha { T::zero() } else { lit::<T>((alpha - k) as f64) * (-q).ln_1p() };
            let x = c * lit((k * (k - 1)) as f64);
            let ln_expm1 = if x > lit(30.0) { x + (-(-x).exp()).ln_1p() } else { x.exp_m1().ln() };
            ln_binomial::<T>(alpha, k) + lit::<T>(k as f64) * q.ln() + l1 + ln_expm1
        })
        .collect();
    Ok(log1p_exp(log_sum_exp(&terms)))
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    /// Standard deviation of the antithetic pair means over `sqrt(pairs)`.
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Two one-dimensional Gaussian mixtures with a common variance, given as `(weight, mean)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub numerator: Vec<(f64, f64)>,
    pub denominator: Vec<(f64, f64)>,
}

impl MixtureSpec {
    /// `(1-q) N(0) + q N(1)` against `N(0)`; its order-α moment is `H_{α,σ}(q)` at `σ_eff = σ/2`.
    pub fn add_remove(q: f64) -> Self {
        Self {
            numerator: vec![(1.0 - q, 0.0), (q, 1.0)],
            denominator: vec![(1.0, 0.0)],
        }
    }

    /// Replace-one pair with anti-parallel shifts `±1/2`, so both shifts and their
    /// difference saturate the unit sensitivity constraints.
    pub fn replace_one_antiparallel(q: f64) -> Self {
        Self {
            numerator: vec![(1.0 - q, 0.0), (q, 0.5)],
            denominator: vec![(1.0 - q, 0.0), (q, -0.5)],
        }
    }

    /// Replace-one pair where one mixture has no shift at all.
    pub fn replace_one_one_sided(q: f64) -> Self {
        Self {
            numerator: vec![(1.0 - q, 0.0), (q, 1.0)],
            denominator: vec![(1.0, 0.0)],
        }
    }

    fn validate(&self) -> Result<()> {
        for side in [&self.numerator, &self.denominator] {
            if side.is_empty() || side.iter().any(|&(w, m)| !(w >= 0.0) || !m.is_finite()) {
                return domain("mixture weights must be non-negative and means finite");
            }
            let s: f64 = side.iter().map(|c| c.0).sum();
            if (s - 1.0).abs() > 1e-12 {
                return domain(format!("mixture weights must sum to one, got {s}"));
            }
        }
        Ok(())
    }
}

/// `ln(mixture density / N(0, σ²) density)` at `x`.
fn ln_ratio(components: &[(f64, f64)], x: f64, var: f64) -> f64 {
    let terms: Vec<f64> = components
        .iter()
        .map(|&(w, mu)| w.ln() + (mu * x - 0.5 * mu * mu) / var)
        .collect();
    log_sum_exp(&terms)
}

const PAIRS_PER_BLOCK: usize = 8192;

#[derive(Clone, Copy)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn merge(self, o: Moments) -> Moments {
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }
}

/// Importance-sampling estimate of `∫ P^α Q^{1-α}` under `N(0, σ_eff²)` with antithetic pairs.
///
/// Draws are split into fixed blocks; block `b` uses ChaCha8 seeded with `seed` on stream `b`,
/// and block statistics are merged in block order, so the result does not depend on threading.
pub fn mc_mixture_renyi(
    alpha: f64,
    mixture: &MixtureSpec,
    sigma_eff: f64,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if !(sigma_eff > 0.0) {
        return domain(format!("effective sigma must be positive, got {sigma_eff}"));
    }
    if !(alpha > 1.0) {
        return domain(format!("alpha must exceed 1, got {alpha}"));
    }
    if samples < 10_000 {
        return domain(format!("at least 10^4 samples are required, got {samples}"));
    }
    mixture.validate()?;
    let pairs = samples.div_ceil(2);
    let blocks = pairs.div_ceil(PAIRS_PER_BLOCK);
    let var = sigma_eff * sigma_eff;
    let integrand = |x: f64| {
        (alpha * ln_ratio(&mixture.numerator, x, var) - (alpha - 1.0) * ln_ratio(&mixture.denominator, x, var)).exp()
    };
    let stats: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = PAIRS_PER_BLOCK.min(pairs - b * PAIRS_PER_BLOCK);
            let mut acc = Moments { n: 0.0, mean: 0.0, m2: 0.0 };
            for _ in 0..count {
                let z: f64 = StandardNormal.sample(&mut rng);
                let x = sigma_eff * z;
                let u = 0.5 * (integrand(x) + integrand(-x));
                acc.n += 1.0;
                let d = u - acc.mean;
                acc.mean += d / acc.n;
                acc.m2 += d * (u - acc.mean);
            }
            acc
        })
        .collect();
    let total = stats
        .into_iter()
        .fold(Moments { n: 0.0, mean: 0.0, m2: 0.0 }, Moments::merge);
    let sd = (total.m2 / (total.n - 1.0)).sqrt();
    Ok(McEstimate {
        value: total.mean,
        std_error: sd / total.n.sqrt(),
        samples: 2 * pairs,
        seed,
    })
}

/// Outcome of an exact enumeration check.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    /// Number of distinct outcomes carrying positive probability.
    pub outcomes: usize,
    /// Number of outcomes of the target uniform law.
    pub expected_outcomes: usize,
    /// Probability each outcome should have.
    pub expected: BigRational,
    /// Outcomes whose probability differs from `expected`.
    pub mismatches: usize,
}

impl DecompositionReport {
    pub fn is_exact(&self) -> bool {
        self.mismatches == 0 && self.outcomes == self.expected_outcomes
    }

    fn from_law<K: Ord>(law: &BTreeMap<K, BigRational>, expected_outcomes: usize, expected: BigRational) -> Self {
        let support: Vec<&BigRational> = law.values().filter(|p| !p.is_zero()).collect();
        Self {
            outcomes: support.len(),
            expected_outcomes,
            mismatches: support.iter().filter(|p| ***p != expected).count(),
            expected,
        }
    }
}

fn rat(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        0
    } else {
        (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
    }
}

fn subsets(universe: usize, size: usize) -> impl Iterator<Item = u32> {
    (0u32..(1u32 << universe)).filter(move |m| m.count_ones() as usize == size)
}

/// Enumerates `J ~ Bernoulli(q)`, `B'` uniform of size `|B|` in `{0..|D|-2}` and `B̃` uniform of
/// size `|B|-1` in `B'`, and checks that `B = B'` (J=0) or `B̃ ∪ {|D|-1}` (J=1) is uniform over
/// all `|B|`-subsets. When `|B| = |D|` the only admissible `B'` is the whole reduced set.
pub fn validate_fswor_decomposition(dataset: usize, batch: usize) -> Result<DecompositionReport> {
    if dataset == 0 || dataset > 8 || batch == 0 || batch > dataset {
        return domain(format!("need 1 <= batch <= dataset <= 8, got batch={batch} dataset={dataset}"));
    }
    let q = rat(batch) / rat(dataset);
    let reduced = dataset - 1;
    let base_size = batch.min(reduced);
    let base: Vec<u32> = subsets(reduced, base_size).collect();
    let p_base = BigRational::one() / rat(base.len());
    let last = 1u32 << reduced;
    let mut law: BTreeMap<u32, BigRational> = BTreeMap::new();
    for &b_prime in &base {
        if batch <= reduced {
            *law.entry(b_prime).or_insert_with(BigRational::zero) += (BigRational::one() - &q) * &p_base;
        }
        let inner: Vec<u32> = (0..reduced)
            .map(|i| 1u32 << i)
            .filter(|bit| b_prime & bit != 0)
            .combinations(batch - 1)
            .map(|bits| bits.into_iter().fold(0, |a, b| a | b))
            .collect();
        let p_inner = BigRational::one() / rat(inner.len());
        for b_tilde in inner {
            *law.entry(b_tilde | last).or_insert_with(BigRational::zero) += &q * &p_base * &p_inner;
        }
    }
    let n_subsets = binom(dataset, batch);
    Ok(DecompositionReport::from_law(&law, n_subsets, BigRational::one() / rat(n_subsets)))
}

/// Enumerates `B'` uniform on `{0..|D|-2}^{|B|}`, `N ~ Binomial(|B|, 1/|D|)` and a uniform
/// permutation `Π`, sets `B_i = |D|-1` when `i ∈ Π({0..N-1})` and `B'_i` otherwise, and checks that
/// the resulting tuple is uniform on `{0..|D|-1}^{|B|}`.
pub fn validate_fswr_decomposition(dataset: usize, batch: usize) -> Result<DecompositionReport> {
    if !(1..=6).contains(&dataset) || batch == 0 || batch > 4 {
        return domain(format!("need 1 <= dataset <= 6 and 1 <= batch <= 4, got batch={batch} dataset={dataset}"));
    }
    let reduced = dataset - 1;
    // With a single record every draw is replaced, so `B'` is a placeholder of weight one.
    let base: Vec<Vec<usize>> = if reduced == 0 {
        vec![vec![0; batch]]
    } else {
        (0..batch).map(|_| 0..reduced).multi_cartesian_product().collect()
    };
    let p_base = BigRational::one() / rat(base.len());
    let perms: Vec<Vec<usize>> = (0..batch).permutations(batch).collect();
    let p_perm = BigRational::one() / rat(perms.len());
    let d = rat(dataset);
    let p_draw = BigRational::one() / &d;
    let p_keep = BigRational::one() - &p_draw;
    let p_n: Vec<BigRational> = (0..=batch)
        .map(|n| rat(binom(batch, n)) * num_traits::pow(p_draw.clone(), n) * num_traits::pow(p_keep.clone(), batch - n))
        .collect();
    let mut law: BTreeMap<Vec<usize>, BigRational> = BTreeMap::new();
    for b_prime in base {
        for (n, pn) in p_n.iter().enumerate() {
            for perm in &perms {
                let mut tuple = b_prime.clone();
                for &i in &perm[..n] {
                    tuple[i] = reduced;
                }
                *law.entry(tuple).or_insert_with(BigRational::zero) += &p_base * pn * &p_perm;
            }
        }
    }
    let total = dataset.pow(batch as u32);
    Ok(DecompositionReport::from_law(&law, total, BigRational::one() / rat(total)))
}

/// Full `(|B|+1)^α` sum `Σ Π a_{n_i} e^{(4/σ²) Σ_{i<j} n_i n_j}`, returned as `ln(·)/(α-1)`.
pub fn brute_fswr_lower(alpha: usize, sigma: f64, batch: usize, dataset: usize) -> Result<f64> {
    if !(2..=4).contains(&alpha) || batch == 0 || batch > 8 || dataset == 0 || !(sigma > 0.0) {
        return domain("need 2 <= alpha <= 4, 1 <= batch <= 8, dataset >= 1, sigma > 0");
    }
    let p = 1.0 / dataset as f64;
    let a: Vec<f64> = (0..=batch)
        .map(|n| binom(batch, n) as f64 * p.powi(n as i32) * (1.0 - p).powi((batch - n) as i32))
        .collect();
    let c = 4.0 / (sigma * sigma);
    let mut excess = 0.0;
    for tuple in (0..alpha).map(|_| 0..=batch).multi_cartesian_product() {
        let w: f64 = tuple.iter().map(|&n| a[n]).product();
        let mut cross = 0.0;
        for i in 0..alpha {
            for j in (i + 1)..alpha {
                cross += (tuple[i] * tuple[j]) as f64;
            }
        }
        excess += w * (c * cross).exp_m1();
    }
    Ok(excess.ln_1p() / (alpha - 1) as f64)
}

/// Exact variance of the minibatch mean by exhaustive enumeration.
pub fn brute_variance(values: &[BigRational], batch: usize, mode: SamplingMode) -> Result<BigRational> {
    let d = values.len();
    if d == 0 || d > 6 || batch == 0 || batch > d {
        return domain("need 1 <= batch <= |D| <= 6");
    }
    let b = rat(batch);
    let mut first = BigRational::zero();
    let mut second = BigRational::zero();
    let mut add = |prob: BigRational, z: BigRational| {
        first += &prob * &z;
        second += prob * &z * &z;
    };
    let mean_of = |idx: &mut dyn Iterator<Item = usize>| -> BigRational {
        idx.fold(BigRational::zero(), |acc, i| acc + &values[i]) / &b
    };
    match mode {
        SamplingMode::Poisson => {
            let q = rat(batch) / rat(d);
            for mask in 0u32..(1 << d) {
                let k = mask.count_ones() as usize;
                let prob = num_traits::pow(q.clone(), k) * num_traits::pow(BigRational::one() - &q, d - k);
                let z = mean_of(&mut (0..d).filter(|i| mask & (1 << i) != 0));
                add(prob, z);
            }
        }
        SamplingMode::WithoutReplacement => {
            let prob = BigRational::one() / rat(binom(d, batch));
            for mask in subsets(d, batch) {
                let z = mean_of(&mut (0..d).filter(|i| mask & (1 << i) != 0));
                add(prob.clone(), z);
            }
        }
        SamplingMode::WithReplacement => {
            let prob = BigRational::one() / rat(d.pow(batch as u32));
            for tuple in (0..batch).map(|_| 0..d).multi_cartesian_product() {
                let z = mean_of(&mut tuple.into_iter());
                add(prob.clone(), z);
            }
        }
    }
    Ok(second - &first * &first)
}
