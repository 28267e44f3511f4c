//! Variance of the minibatch mean under Poisson, without-replacement and with-replacement
//! subsampling. Generic over any field, so the same formulas run in floating point and in
//! exact rational arithmetic.

use crate::error::{domain, Result};
use num_traits::{FromPrimitive, Num};

/// Field operations needed by the closed forms.
pub trait Field: Clone + Num + PartialOrd + FromPrimitive {}
impl<T: Clone + Num + PartialOrd + FromPrimitive> Field for T {}

fn from_count<T: Field>(n: usize) -> T {
    T::from_usize(n).expect("count representable")
}

/// Per-sample projected gradients `a_1, ..., a_|D|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Population<T> {
    values: Vec<T>,
}

impl<T: Field> Population<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return domain("population must contain at least one value");
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `ā`.
    pub fn mean(&self) -> T {
        let s = self.values.iter().cloned().fold(T::zero(), |a, b| a + b);
        s / from_count(self.len())
    }

    /// `mean(a²)`.
    pub fn mean_square(&self) -> T {
        let s = self
            .values
            .iter()
            .cloned()
            .fold(T::zero(), |a, b| a + b.clone() * b);
        s / from_count(self.len())
    }
}

fn check_batch<T: Field>(pop: &Population<T>, batch: usize) -> Result<()> {
    if batch == 0 || batch > pop.len() {
        return domain(format!("batch must lie in 1..={}, got {batch}", pop.len()));
    }
    Ok(())
}

/// `1/|B| - 1/|D|`.
fn gap<T: Field>(batch: usize, dataset: usize) -> T {
    T::one() / from_count(batch) - T::one() / from_count(dataset)
}

/// `(1/|B| - 1/|D|) mean(a²)`.
pub fn var_poisson<T: Field>(pop: &Population<T>, batch: usize) -> Result<T> {
    check_batch(pop, batch)?;
    Ok(gap::<T>(batch, pop.len()) * pop.mean_square())
}

/// `(|D|/(|D|-1)) (Var_P - (1/|B| - 1/|D|) ā²)`; needs `|D| >= 2`.
pub fn var_fswor<T: Field>(pop: &Population<T>, batch: usize) -> Result<T> {
    check_batch(pop, batch)?;
    let d = pop.len();
    if d < 2 {
        return domain("without-replacement variance needs at least two samples");
    }
    let mean = pop.mean();
    let vp = var_poisson(pop, batch)?;
    let dd: T = from_count(d);
    Ok(dd.clone() / (dd - T::one()) * (vp - gap::<T>(batch, d) * mean.clone() * mean))
}

/// `(mean(a²) - ā²)/|B|`, equal to `((1 - 1/|D|)/(1 - q)) Var_B` whenever `q < 1`.
pub fn var_fswr<T: Field>(pop: &Population<T>, batch: usize) -> Result<T> {
    check_batch(pop, batch)?;
    let mean = pop.mean();
    Ok((pop.mean_square() - mean.clone() * mean) / from_count(batch))
}

/// Variance ratios between the three schemes.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceRatios<T> {
    /// `(1/(1 - 1/|D|)) (1 - ā²/mean(a²))`.
    pub fswor_over_poisson: T,
    /// `(1 - 1/|D|)/(1 - q)`.
    pub fswr_over_fswor: T,
}

pub fn variance_ratios<T: Field>(pop: &Population<T>, batch: usize) -> Result<VarianceRatios<T>> {
    let vp = var_poisson(pop, batch)?;
    let vb = var_fswor(pop, batch)?;
    if vp == T::zero() {
        return domain("Poisson variance is zero; ratio undefined");
    }
    if vb == T::zero() {
        return domain("without-replacement variance is zero; ratio undefined");
    }
    let d: T = from_count(pop.len());
    let b: T = from_count(batch);
    let keep = T::one() - T::one() / d.clone();
    let mean = pop.mean();
    Ok(VarianceRatios {
        fswor_over_poisson: (T::one() - mean.clone() * mean / pop.mean_square()) / keep.clone(),
        fswr_over_fswor: keep / (T::one() - b / d),
    })
}
