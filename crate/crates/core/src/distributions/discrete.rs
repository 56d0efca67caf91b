use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Sample;
use crate::error::{param, Error, Result};
use crate::rng::SeededRng;
use crate::scalar::{exact, Scalar};

/// Largest deviation of the total mass from 1 that float construction
/// accepts (and then renormalizes away).
pub const MASS_TOLERANCE: f64 = 1e-9;

/// A nonnegative random variable with finitely many atoms.
///
/// Atoms are sorted by strictly increasing value and carry positive
/// probability. Prefix (`Pr[X <= v]`) and suffix (`Pr[X >= v]`) sums are
/// cached; the last prefix and first suffix entries are pinned to exactly one.
#[derive(Clone, Debug, PartialEq)]
pub struct Discrete<T> {
    // `[values | probs | cdf | tail]`, one allocation per variable; large
    // instances hold millions of these.
    data: Box<[T]>,
}

pub type DiscreteDistribution = Discrete<f64>;
pub type RationalDistribution = Discrete<BigRational>;

fn cmp<T: PartialOrd>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).expect("values are totally ordered")
}

/// Sorts atoms, merges duplicate values and drops zero-probability atoms.
fn canonical<T: Scalar>(mut atoms: Vec<(T, T)>) -> (Vec<T>, Vec<T>) {
    atoms.sort_by(|a, b| cmp(&a.0, &b.0));
    let mut values: Vec<T> = Vec::with_capacity(atoms.len());
    let mut probs: Vec<T> = Vec::with_capacity(atoms.len());
    for (v, p) in atoms {
        if values.last() == Some(&v) {
            let last = probs.last_mut().unwrap();
            *last = last.clone() + p;
        } else {
            values.push(v);
            probs.push(p);
        }
    }
    let (values, probs) = values
        .into_iter()
        .zip(probs)
        .filter(|(_, p)| !p.is_zero())
        .unzip();
    (values, probs)
}

impl<T: Scalar> Discrete<T> {
    /// Builds from canonical atoms without validation or renormalization.
    pub(crate) fn from_sorted(values: Vec<T>, probs: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), probs.len());
        debug_assert!(!values.is_empty());
        let m = values.len();
        let mut data = Vec::with_capacity(4 * m);
        data.extend(values);
        data.extend(probs.iter().cloned());
        let mut acc = T::zero();
        for p in &probs {
            acc = acc + p.clone();
            data.push(acc.clone());
        }
        data[3 * m - 1] = T::one();
        data.resize(4 * m, T::zero());
        let mut acc = T::zero();
        for j in (0..m).rev() {
            acc = probs[j].clone() + acc;
            data[3 * m + j] = acc.clone();
        }
        data[3 * m] = T::one();
        Self { data: data.into_boxed_slice() }
    }

    fn part(&self, i: usize) -> &[T] {
        let m = self.data.len() / 4;
        &self.data[i * m..(i + 1) * m]
    }

    /// Canonicalizes arbitrary atoms that are already known to be valid.
    pub(crate) fn from_atoms_unchecked(atoms: Vec<(T, T)>) -> Self {
        let (values, probs) = canonical(atoms);
        Self::from_sorted(values, probs)
    }

    pub fn point_mass(v: T) -> Self {
        Self::from_sorted(vec![v], vec![T::one()])
    }

    pub fn values(&self) -> &[T] {
        self.part(0)
    }

    pub fn probs(&self) -> &[T] {
        self.part(1)
    }

    /// `Pr[X <= values[j]]` for every atom.
    pub fn cdf_at_atoms(&self) -> &[T] {
        self.part(2)
    }

    /// `Pr[X >= values[j]]` for every atom.
    pub fn tail_at_atoms(&self) -> &[T] {
        self.part(3)
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&T, &T)> {
        self.values().iter().zip(self.probs())
    }

    pub fn len(&self) -> usize {
        self.values().len()
    }

    pub fn is_empty(&self) -> bool {
        self.values().is_empty()
    }

    pub fn min_value(&self) -> &T {
        &self.values()[0]
    }

    pub fn max_value(&self) -> &T {
        self.values().last().unwrap()
    }

    /// `Pr[X <= v]`.
    pub fn cdf(&self, v: &T) -> T {
        match self.values().partition_point(|x| x <= v) {
            0 => T::zero(),
            c => self.cdf_at_atoms()[c - 1].clone(),
        }
    }

    /// `Pr[X < v]`.
    pub fn prob_lt(&self, v: &T) -> T {
        match self.values().partition_point(|x| x < v) {
            0 => T::zero(),
            c => self.cdf_at_atoms()[c - 1].clone(),
        }
    }

    /// `Pr[X >= v]`.
    pub fn prob_ge(&self, v: &T) -> T {
        let c = self.values().partition_point(|x| x < v);
        self.tail_at_atoms().get(c).cloned().unwrap_or_else(T::zero)
    }

    /// `Pr[X > v]`.
    pub fn prob_gt(&self, v: &T) -> T {
        let c = self.values().partition_point(|x| x <= v);
        self.tail_at_atoms().get(c).cloned().unwrap_or_else(T::zero)
    }

    /// Index of the atom `alpha_p`: the largest atom `v` with
    /// `Pr[X >= v] >= 1/p`.
    pub fn quantile_index(&self, p: &T) -> Result<usize> {
        if *p < T::one() {
            return param(format!("quantile parameter must be >= 1, got {p:?}"));
        }
        let threshold = T::one() / p.clone();
        let count = self.tail_at_atoms().partition_point(|t| *t >= threshold);
        Ok(count.max(1) - 1)
    }

    /// `alpha_p = sup { v : Pr[X >= v] >= 1/p }`.
    pub fn quantile_alpha(&self, p: &T) -> Result<T> {
        Ok(self.values()[self.quantile_index(p)?].clone())
    }

    /// `E[X * 1{X >= x}]`.
    pub fn tail_contribution(&self, x: &T) -> T {
        let c = self.values().partition_point(|v| v < x);
        let mut acc = T::zero();
        for j in c..self.values().len() {
            acc = acc + self.values()[j].clone() * self.probs()[j].clone();
        }
        acc
    }

    pub fn mean(&self) -> T {
        self.tail_contribution(&T::zero())
    }

    /// `min(X, alpha_p)`: atoms below `alpha_p` are kept and all mass at or
    /// above it is placed on `alpha_p`. The new atom's mass is the cached
    /// suffix sum, so re-deriving the quantile on the result reproduces the
    /// same value bit for bit.
    pub fn truncate_at_quantile(&self, p: &T) -> Result<Self> {
        let j = self.quantile_index(p)?;
        Ok(self.truncate_at_index(j))
    }

    pub(crate) fn truncate_at_index(&self, j: usize) -> Self {
        let values = self.values()[..=j].to_vec();
        let mut probs = self.probs()[..j].to_vec();
        probs.push(self.tail_at_atoms()[j].clone());
        Self::from_sorted(values, probs)
    }

    /// `c * X` for `c > 0`.
    pub fn scaled(&self, c: &T) -> Self {
        assert!(c.is_positive(), "scale must be positive");
        Self::from_sorted(
            self.values().iter().map(|v| v.clone() * c.clone()).collect(),
            self.probs().to_vec(),
        )
    }

    /// Mixes `self` with weight `w` and `other` with weight `1 - w`.
    pub fn mixture(&self, other: &Self, w: &T) -> Self {
        let mut atoms: Vec<(T, T)> = self
            .atoms()
            .map(|(v, p)| (v.clone(), p.clone() * w.clone()))
            .collect();
        let rest = T::one() - w.clone();
        atoms.extend(other.atoms().map(|(v, p)| (v.clone(), p.clone() * rest.clone())));
        Self::from_atoms_unchecked(atoms)
    }
}

impl Discrete<f64> {
    /// Validates and canonicalizes `(value, probability)` pairs. Values and
    /// probabilities must be finite and nonnegative; the total mass must lie
    /// within `1e-9` of one and is renormalized when it is not exactly one.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        for &(v, p) in &atoms {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidDistribution(format!("value {v} must be finite and >= 0")));
            }
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "probability {p} must be finite and >= 0"
                )));
            }
        }
        let (values, mut probs) = canonical(atoms);
        if values.is_empty() {
            return Err(Error::InvalidDistribution("no atom with positive probability".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {sum}, not 1")));
        }
        if sum != 1.0 {
            for p in &mut probs {
                *p /= sum;
            }
        }
        Ok(Self::from_sorted(values, probs))
    }

    /// Uniform distribution over the given samples, duplicates merged.
    pub fn empirical(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidDistribution("no samples".into()));
        }
        let mut sorted = samples.to_vec();
        if sorted.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidDistribution("samples must be finite and >= 0".into()));
        }
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mut values = Vec::new();
        let mut probs = Vec::new();
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j < sorted.len() && sorted[j] == sorted[i] {
                j += 1;
            }
            values.push(sorted[i]);
            probs.push((j - i) as f64 / n);
            i = j;
        }
        Ok(Self::from_sorted(values, probs))
    }

    /// Exact rational copy, renormalized in exact arithmetic so its mass is
    /// exactly one.
    pub fn to_rational(&self) -> RationalDistribution {
        let probs: Vec<BigRational> = self.probs().iter().map(|p| exact(*p)).collect();
        let total = probs.iter().fold(BigRational::zero(), |a, b| a + b);
        let probs = if total.is_one() {
            probs
        } else {
            probs.into_iter().map(|p| p / &total).collect()
        };
        Discrete::from_sorted(self.values().iter().map(|v| exact(*v)).collect(), probs)
    }
}

impl Sample for Discrete<f64> {
    fn sample(&self, rng: &mut SeededRng) -> f64 {
        let u = rng.unit();
        let i = self.cdf_at_atoms().partition_point(|c| *c <= u);
        self.values()[i.min(self.values().len() - 1)]
    }
}

impl Discrete<BigRational> {
    /// Validates exact atoms; probabilities must sum to exactly one.
    pub fn new(atoms: impl IntoIterator<Item = (BigRational, BigRational)>) -> Result<Self> {
        let atoms: Vec<_> = atoms.into_iter().collect();
        if atoms.iter().any(|(v, p)| v.is_negative() || p.is_negative()) {
            return Err(Error::InvalidDistribution("values and probabilities must be >= 0".into()));
        }
        let (values, probs) = canonical(atoms);
        let total = probs.iter().fold(BigRational::zero(), |a, b| a + b);
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, not exactly 1"
            )));
        }
        Ok(Self::from_sorted(values, probs))
    }

    pub fn to_f64(&self) -> Result<DiscreteDistribution> {
        DiscreteDistribution::new(self.atoms().map(|(v, p)| (v.to_float(), p.to_float())))
    }
}
