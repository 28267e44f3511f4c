//! Fixed-size subsampling with replacement: RDP upper bound and worst-case lower bound.

use crate::curve::{compose_with, AccountantConfig, Epsilon, RdpCurve};
use crate::error::{domain, Result};
use crate::fswor::{check_args, ln_h_excess};
use crate::real::{as_integer, from_usize, ln_binomial, lit, log1p_exp, log_binomial_mgf, log_sum_exp, Real};
use crate::signed_log::{self, SignedLog};
use crate::curve::SubsamplingSpec;
use std::collections::{BTreeMap, HashMap};

/// `ln(e^x - 1)` for `x >= 0`.
pub(crate) fn ln_expm1<T: Real>(x: T) -> T {
    if x > lit(1.0) {
        x + (-(-x).exp_m1()).ln()
    } else {
        x.exp_m1().ln()
    }
}

/// `ln a_n = ln[C(|B|,n) N^{-n} (1 - 1/N)^{|B|-n}]` for `n = 0..=|B|`.
pub(crate) fn ln_binomial_weights<T: Real>(batch: usize, dataset: usize) -> Vec<T> {
    let ln_n = lit::<T>(dataset as f64).ln();
    let ln_keep = (-T::one() / lit(dataset as f64)).ln_1p();
    let raw: Vec<T> = (0..=batch)
        .map(|n| ln_binomial::<T>(batch, n) - ln_n * from_usize(n) + ln_keep * from_usize(batch - n))
        .collect();
    // Log-gamma rounding grows with |B|; renormalise so the weights sum to one.
    let total = log_sum_exp(&raw);
    raw.into_iter().map(|l| l - total).collect()
}

/// Mixture weights of the with-replacement decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct FswrWeights<T> {
    /// `q̃ = 1 - (1 - 1/|D|)^{|B|}`.
    pub q_tilde: T,
    /// `ã_n = a_n / q̃` for `n = 1..=|B|` (index `n - 1`).
    pub a_tilde: Vec<T>,
    /// `a_n` for `n = 0..=|B|`.
    pub a: Vec<T>,
}

impl<T: Real> FswrWeights<T> {
    pub fn new(batch: usize, dataset: usize) -> Result<Self> {
        if batch == 0 || dataset == 0 {
            return domain("batch and dataset sizes must be positive");
        }
        let ln_a = ln_binomial_weights::<T>(batch, dataset);
        let q_tilde = q_tilde::<T>(batch, dataset);
        Ok(Self {
            q_tilde,
            a_tilde: {
                let ln_norm = log_sum_exp(&ln_a[1..]);
                ln_a[1..].iter().map(|&l| (l - ln_norm).exp()).collect()
            },
            a: ln_a.iter().map(|l| l.exp()).collect(),
        })
    }
}

/// `1 - (1 - 1/|D|)^{|B|}` without cancellation.
pub fn q_tilde<T: Real>(batch: usize, dataset: usize) -> T {
    -(lit::<T>(batch as f64) * (-T::one() / lit(dataset as f64)).ln_1p()).exp_m1()
}

/// Alternative split `(K, q̃)` of the mixture; admissible when `q̃ >= (1 + a_0/Σ_{n<=K} a_n)^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FswrSplit<T> {
    pub k: usize,
    pub q_tilde: T,
}

impl<T: Real> FswrSplit<T> {
    /// The split used by default: `K = |B|` and `q̃ = 1 - (1 - 1/|D|)^{|B|}`.
    pub fn standard(spec: &SubsamplingSpec) -> Self {
        Self {
            k: spec.batch,
            q_tilde: q_tilde(spec.batch, spec.dataset),
        }
    }

    /// Smallest admissible `q̃` for a given `K`.
    pub fn min_q_tilde(spec: &SubsamplingSpec, k: usize) -> T {
        if k >= spec.batch {
            return q_tilde(spec.batch, spec.dataset);
        }
        let ln_a = ln_binomial_weights::<T>(spec.batch, spec.dataset);
        let ln_head = log_sum_exp(&ln_a[1..=k.min(spec.batch)]);
        T::one() / (T::one() + (ln_a[0] - ln_head).exp())
    }

    pub fn validate(&self, spec: &SubsamplingSpec) -> Result<()> {
        if self.k == 0 || self.k > spec.batch {
            return domain(format!("split index K must lie in 1..={}, got {}", spec.batch, self.k));
        }
        if !(self.q_tilde > T::zero() && self.q_tilde < T::one()) {
            return domain(format!("q-tilde must lie in (0, 1), got {}", self.q_tilde));
        }
        let min = Self::min_q_tilde(spec, self.k);
        if self.q_tilde < min * (T::one() - lit::<T>(8.0) * T::epsilon()) {
            return domain(format!("q-tilde {} below admissible minimum {}", self.q_tilde, min));
        }
        Ok(())
    }
}

/// One-step with-replacement upper bound `ln[Σ_n ã_n H_{α,σ/n}(q̃)]/(α-1)`.
pub fn fswr_upper_step<T: Real>(alpha: T, sigma: T, spec: &SubsamplingSpec, m: usize) -> Result<Epsilon<T>> {
    fswr_upper_step_with(alpha, sigma, spec, m, FswrSplit::standard(spec))
}

/// Upper bound for a general admissible split: terms `n <= K` use the Taylor bound on
/// `H_{α,σ/n}(q̃)`, terms `n > K` use the exact Gaussian moment `e^{2α(α-1)n²/σ²}`.
pub fn fswr_upper_step_with<T: Real>(
    alpha: T,
    sigma: T,
    spec: &SubsamplingSpec,
    m: usize,
    split: FswrSplit<T>,
) -> Result<Epsilon<T>> {
    SubsamplingSpec::new(spec.batch, spec.dataset)?;
    check_args(alpha, sigma, T::zero(), m)?;
    split.validate(spec)?;
    let ln_a = ln_binomial_weights::<T>(spec.batch, spec.dataset);
    let ln_qt = if split.k == spec.batch {
        log_sum_exp(&ln_a[1..])
    } else {
        split.q_tilde.ln()
    };
    let mut terms = Vec::with_capacity(spec.batch);
    for n in (1..=spec.batch).rev() {
        let nn = from_usize::<T>(n);
        if n <= split.k {
            let s = ln_h_excess(alpha, sigma / nn, split.q_tilde, m)?;
            terms.push(s.scale_ln(ln_a[n] - ln_qt));
        } else {
            let x = lit::<T>(2.0) * alpha * (alpha - T::one()) * nn * nn / (sigma * sigma);
            terms.push(SignedLog::from_ln(ln_a[n] + ln_expm1(x)));
        }
    }
    Ok(Epsilon::from_excess(signed_log::sum(&terms), alpha))
}

/// T-step with-replacement curve.
pub fn compose_fswr<T: Real>(config: &AccountantConfig<T>) -> Result<RdpCurve<T>> {
    config.validate()?;
    let spec = config.spec;
    let m = config.taylor_order;
    compose_with("fswr_upper", &config.alpha_grid, &config.sigmas, |a, s| {
        fswr_upper_step(a, s, &spec, m)
    })
}

/// T-step lower curve on the integer orders `>= 2` of `alphas`, using the standard truncation.
pub fn compose_fswr_lower<T: Real>(alphas: &[T], sigmas: &[T], batch: usize, dataset: usize) -> Result<RdpCurve<T>> {
    let orders = integer_orders(alphas)?;
    compose_with("fswr_lower", &orders, sigmas, |a, s| {
        let k = as_integer(a).expect("integer order");
        fswr_lower(a, s, batch, dataset, &TruncationScheme::standard(k, batch)).map(lower_point)
    })
}

/// Integer orders `>= 2` of a grid.
pub(crate) fn integer_orders<T: Real>(alphas: &[T]) -> Result<Vec<T>> {
    let orders: Vec<T> = alphas
        .iter()
        .copied()
        .filter(|&a| matches!(as_integer(a), Some(k) if k >= 2))
        .collect();
    if orders.is_empty() {
        return domain("lower bounds need at least one integer order >= 2 in the grid");
    }
    Ok(orders)
}

pub(crate) fn lower_point<T: Real>(value: T) -> Epsilon<T> {
    Epsilon {
        value,
        saturated: value == T::infinity(),
        clamped: false,
    }
}

/// Retained index sets `T_k ⊆ {0, ..., |B|}` for levels `k = 2..=α`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationScheme {
    levels: BTreeMap<usize, Vec<usize>>,
}

impl TruncationScheme {
    pub fn new(levels: BTreeMap<usize, Vec<usize>>) -> Result<Self> {
        let mut clean = BTreeMap::new();
        for (k, mut set) in levels {
            if k < 2 {
                return domain(format!("truncation levels start at 2, got {k}"));
            }
            set.sort_unstable();
            set.dedup();
            if set.is_empty() {
                return domain(format!("truncation set for level {k} is empty"));
            }
            clean.insert(k, set);
        }
        Ok(Self { levels: clean })
    }

    /// Every level keeps all indices.
    pub fn full(alpha: usize, batch: usize) -> Self {
        Self {
            levels: (2..=alpha).map(|k| (k, (0..=batch).collect())).collect(),
        }
    }

    /// `T_2` full and `T_k = {0, 1, 2, |B|}` above.
    pub fn standard(alpha: usize, batch: usize) -> Self {
        let mut levels = BTreeMap::new();
        levels.insert(2, (0..=batch).collect());
        for k in 3..=alpha {
            let mut set: Vec<usize> = [0, 1, 2, batch].into_iter().filter(|&n| n <= batch).collect();
            set.dedup();
            levels.insert(k, set);
        }
        Self { levels }
    }

    pub fn level(&self, k: usize) -> Option<&[usize]> {
        self.levels.get(&k).map(|v| v.as_slice())
    }

    fn check(&self, alpha: usize, batch: usize) -> Result<()> {
        for k in 2..=alpha {
            match self.levels.get(&k) {
                None => return domain(format!("truncation scheme is missing level {k}")),
                Some(set) => {
                    if let Some(&n) = set.iter().find(|&&n| n > batch) {
                        return domain(format!("index {n} at level {k} exceeds batch size {batch}"));
                    }
                }
            }
        }
        Ok(())
    }
}

struct LowerRecursion<'a, T> {
    c: T,
    p: T,
    batch: usize,
    ln_a: &'a [T],
    /// `ln Σ_{n ∉ T_k} a_n` per level.
    ln_out: HashMap<usize, T>,
    scheme: &'a TruncationScheme,
    memo: HashMap<(usize, usize), SignedLog<T>>,
}

impl<T: Real> LowerRecursion<'_, T> {
    /// `F_{T,k}(c, c·s) - 1` in signed log form.
    fn excess(&mut self, k: usize, s: usize) -> SignedLog<T> {
        if let Some(v) = self.memo.get(&(k, s)) {
            return *v;
        }
        let set = self.scheme.level(k).expect("checked").to_vec();
        let mut terms = Vec::with_capacity(2 * set.len() + 1);
        let cs = self.c * from_usize(s);
        for &n in &set {
            let shift = cs * from_usize(n);
            if k == 2 {
                let z = shift
                    + from_usize::<T>(self.batch) * log_binomial_mgf(self.p, self.c * from_usize(n + s));
                terms.push(SignedLog::from_ln(self.ln_a[n] + ln_expm1(z)));
            } else {
                terms.push(SignedLog::from_ln(self.ln_a[n] + ln_expm1(shift)));
                let inner = self.excess(k - 1, s + n);
                terms.push(inner.scale_ln(self.ln_a[n] + shift));
            }
        }
        terms.push(SignedLog::from_ln(self.ln_out[&k]).neg());
        let v = signed_log::sum(&terms);
        self.memo.insert((k, s), v);
        v
    }
}

/// Worst-case one-step lower bound `ln F_{T,α}(4/σ², 0)/(α-1)` for integer `α >= 2`.
///
/// With full index sets this equals the iterated sum over `(n_1, ..., n_α)` of
/// `Π a_{n_i} e^{(4/σ²) Σ_{i<j} n_i n_j}`. Smaller sets give smaller, still valid, bounds.
pub fn fswr_lower<T: Real>(
    alpha: T,
    sigma: T,
    batch: usize,
    dataset: usize,
    scheme: &TruncationScheme,
) -> Result<T> {
    let order = match as_integer(alpha) {
        Some(a) if a >= 2 => a,
        _ => return domain(format!("lower bound needs an integer order >= 2, got {alpha}")),
    };
    if !(sigma > T::zero()) {
        return domain(format!("sigma must be positive, got {sigma}"));
    }
    if batch == 0 || dataset == 0 {
        return domain("batch and dataset sizes must be positive");
    }
    scheme.check(order, batch)?;
    let ln_a = ln_binomial_weights::<T>(batch, dataset);
    let mut ln_out = HashMap::new();
    for k in 2..=order {
        let set = scheme.level(k).expect("checked");
        let outside: Vec<T> = (0..=batch).filter(|n| set.binary_search(n).is_err()).map(|n| ln_a[n]).collect();
        ln_out.insert(k, log_sum_exp(&outside));
    }
    let mut rec = LowerRecursion {
        c: lit::<T>(4.0) / (sigma * sigma),
        p: T::one() / lit(dataset as f64),
        batch,
        ln_a: &ln_a,
        ln_out,
        scheme,
        memo: HashMap::new(),
    };
    let e = rec.excess(order, 0);
    let ln_f = match e.sign() {
        0 => T::zero(),
        s if s > 0 => log1p_exp(e.log_magnitude()),
        _ => (-e.log_magnitude().exp()).ln_1p(),
    };
    Ok(ln_f / (alpha - T::one()))
}

/// Closed-form loosening `(α|B|/(α-1)) (2|B|(α-1)/σ² - ln|B| - ln(1/q))`.
pub fn fswr_loosened_lower<T: Real>(alpha: T, sigma: T, batch: usize, q: T) -> T {
    let b = lit::<T>(batch as f64);
    alpha * b / (alpha - T::one())
        * (lit::<T>(2.0) * b * (alpha - T::one()) / (sigma * sigma) - b.ln() + q.ln())
}
