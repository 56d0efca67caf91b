//! Problem instances: `n` independent discrete variables and a budget `k`.

use std::borrow::Cow;

use crate::distributions::{DiscreteDistribution, RationalDistribution};
use crate::error::{Error, Result};

/// `n` independent nonnegative discrete variables and a selection size `k`.
///
/// When the instance was read from exact input, `exact` holds the rational
/// distributions and exact evaluation uses them; otherwise exact evaluation
/// works on the rational value of the float distributions.
#[derive(Clone, Debug)]
pub struct Instance {
    variables: Vec<DiscreteDistribution>,
    exact: Option<Vec<RationalDistribution>>,
    labels: Vec<Option<String>>,
    k: usize,
}

impl Instance {
    pub fn new(variables: Vec<DiscreteDistribution>, k: usize) -> Result<Self> {
        let n = variables.len();
        if n == 0 {
            return Err(Error::InvalidInstance("no variables".into()));
        }
        if k == 0 || k > n {
            return Err(Error::InvalidInstance(format!("need 1 <= k <= n, got k={k}, n={n}")));
        }
        Ok(Self {
            labels: vec![None; n],
            variables,
            exact: None,
            k,
        })
    }

    /// Instance from exact distributions; the float copies are rounded.
    pub fn from_rational(variables: Vec<RationalDistribution>, k: usize) -> Result<Self> {
        let floats = variables.iter().map(|x| x.to_f64()).collect::<Result<Vec<_>>>()?;
        let mut inst = Self::new(floats, k)?;
        inst.exact = Some(variables);
        Ok(inst)
    }

    pub fn with_labels(mut self, labels: Vec<Option<String>>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::InvalidInstance("one label per variable required".into()));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn with_k(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.n() {
            return Err(Error::InvalidInstance(format!("need 1 <= k <= n, got k={k}, n={}", self.n())));
        }
        let mut inst = self.clone();
        inst.k = k;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn variables(&self) -> &[DiscreteDistribution] {
        &self.variables
    }

    pub fn variable(&self, i: usize) -> &DiscreteDistribution {
        &self.variables[i]
    }

    pub fn labels(&self) -> &[Option<String>] {
        &self.labels
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact_variables(&self) -> Option<&[RationalDistribution]> {
        self.exact.as_deref()
    }

    pub fn rational_variable(&self, i: usize) -> Cow<'_, RationalDistribution> {
        match &self.exact {
            Some(v) => Cow::Borrowed(&v[i]),
            None => Cow::Owned(self.variables[i].to_rational()),
        }
    }

    /// Rejects out-of-range or repeated indices.
    pub fn check_subset(&self, subset: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.n()];
        for &i in subset {
            if i >= self.n() {
                return Err(Error::InvalidParameter(format!("index {i} out of range (n={})", self.n())));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidParameter(format!("index {i} repeated")));
            }
        }
        Ok(())
    }
}
