use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::distributions::RationalDistribution;
use crate::error::{param, Error, Result};
use crate::exact::Objective;
use crate::instance::Instance;

/// Largest edge count accepted by the independent-set reduction; its values
/// reach `m^(10m)`.
pub const MAX_IS_EDGES: usize = 8;

/// Bit budget for the largest value of the densest-subgraph reduction, so
/// the float copy of the instance stays finite.
pub const MAX_DKS_BITS: u64 = 1000;

fn int(x: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(x.into())
}

/// Variables with equal means whose expected maximum detects independent
/// sets of a regular graph.
#[derive(Clone, Debug)]
pub struct IndependentSetReduction {
    pub graph: Graph,
    pub instance: Instance,
    /// The common mean of every variable.
    pub mu: BigRational,
    /// An independent `S` of size `k` has `E[max_S]` at least this
    /// (`k mu - 2/m`).
    pub completeness: BigRational,
    /// A size-`k` `S` containing an edge has `E[max_S]` at most this
    /// (`k mu - 1`).
    pub soundness: BigRational,
}

/// Outcome of checking one subset against a reduction's certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateCheck {
    pub subset: Vec<usize>,
    pub value: BigRational,
    pub lower: Option<BigRational>,
    pub upper: Option<BigRational>,
}

impl CertificateCheck {
    pub fn holds(&self) -> bool {
        self.lower.as_ref().is_none_or(|l| &self.value >= l) && self.upper.as_ref().is_none_or(|u| &self.value <= u)
    }
}

/// Builds one variable per vertex of a regular graph with `m` edges.
///
/// Edge `e` (1-based position `p` in the canonical edge list) puts value
/// `m^(4p)` with probability `m^(-2p)` on both endpoints, contributing
/// `m^(2p)` to each mean. A balancing value `m^(10m)` then tops every mean up
/// to `mu`, the largest edge contribution of any vertex, and the remaining
/// mass sits at 0.
pub fn gen_independent_set_instance(graph: &Graph, k: usize) -> Result<IndependentSetReduction> {
    let m = graph.n_edges();
    if m == 0 {
        return param("the reduction needs at least one edge");
    }
    if m > MAX_IS_EDGES {
        return Err(Error::TooLarge(format!(
            "{m} edges exceeds the guard of {MAX_IS_EDGES} (values reach m^(10m))"
        )));
    }
    if graph.regular_degree().is_none() {
        return Err(Error::InvalidInstance("the independent-set reduction needs a regular graph".into()));
    }
    let n = graph.n_vertices();
    if k == 0 || k > n {
        return param(format!("need 1 <= k <= n, got k={k}, n={n}"));
    }
    let base = BigInt::from(m);
    let mut atoms: Vec<Vec<(BigRational, BigRational)>> = vec![Vec::new(); n];
    let mut sums = vec![BigRational::zero(); n];
    for (idx, &(u, v)) in graph.edges().iter().enumerate() {
        let p = (idx + 1) as u32;
        let value = int(base.clone().pow(4 * p));
        let prob = int(base.clone().pow(2 * p)).recip();
        let contribution = int(base.clone().pow(2 * p));
        for w in [u, v] {
            atoms[w].push((value.clone(), prob.clone()));
            sums[w] += &contribution;
        }
    }
    let mu = sums.iter().max().cloned().expect("graph has vertices");
    let top = int(base.pow(10 * m as u32));
    let mut vars = Vec::with_capacity(n);
    for (mut a, s) in atoms.into_iter().zip(&sums) {
        let balance = (&mu - s) / &top;
        a.push((top.clone(), balance));
        let used = a.iter().fold(BigRational::zero(), |acc, (_, p)| acc + p);
        if used > BigRational::one() {
            return Err(Error::InvalidInstance("edge probabilities exceed one".into()));
        }
        a.push((BigRational::zero(), BigRational::one() - used));
        vars.push(RationalDistribution::new(a)?);
    }
    let kk = int(k as u64);
    Ok(IndependentSetReduction {
        graph: graph.clone(),
        instance: Instance::from_rational(vars, k)?,
        completeness: &kk * &mu - int(2u32) / int(m as u64),
        soundness: kk * &mu - BigRational::one(),
        mu,
    })
}

impl IndependentSetReduction {
    /// Exact `E[max_S]` against the completeness bound (independent `S`) or
    /// the soundness bound (`S` containing an edge).
    pub fn check(&self, subset: &[usize]) -> Result<CertificateCheck> {
        let value = self.instance.evaluate_exact(subset, Objective::Max)?;
        let (lower, upper) = if self.graph.is_independent(subset) {
            (Some(self.completeness.clone()), None)
        } else {
            (None, Some(self.soundness.clone()))
        };
        Ok(CertificateCheck {
            subset: subset.to_vec(),
            value,
            lower,
            upper,
        })
    }
}

/// Base of the per-edge magnitudes in the densest-subgraph reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DksBase {
    /// `4 k^2 m + 1`, large enough that every size-`k` set stays within
    /// `1/(2k)` of its internal edge count.
    Safe,
    /// `2k + 1`. Too small on dense graphs: the sandwich can fail.
    Small,
}

impl DksBase {
    pub fn value(self, k: usize, m: usize) -> u64 {
        match self {
            Self::Safe => 4 * (k * k * m) as u64 + 1,
            Self::Small => 2 * k as u64 + 1,
        }
    }
}

/// Position of edge `{i, j}` (1-based vertices) in the pair ordering
/// `(max-1)(max-2)/2 + min`.
pub fn pair_index(i: usize, j: usize) -> usize {
    let (lo, hi) = (i.min(j), i.max(j));
    (hi - 1) * (hi - 2) / 2 + lo
}

/// Variables whose expected second maximum over a size-`k` set counts the
/// set's internal edges.
#[derive(Clone, Debug)]
pub struct DensestSubgraphReduction {
    pub graph: Graph,
    pub instance: Instance,
    pub base: u64,
}

/// Builds one variable per vertex. Edge `{i, j}` with pair index `z` and
/// `p = C^z` adds value `p^2` with probability `1/p` to both endpoints;
/// remaining mass sits at 0. Both endpoints hitting together contributes
/// exactly 1 to the second maximum.
pub fn gen_densest_subgraph_instance(graph: &Graph, k: usize, base: DksBase) -> Result<DensestSubgraphReduction> {
    let n = graph.n_vertices();
    if k < 2 || k > n {
        return param(format!("need 2 <= k <= n, got k={k}, n={n}"));
    }
    let m = graph.n_edges();
    let c = base.value(k, m).max(2);
    let max_index = graph.edges().iter().map(|&(u, v)| pair_index(u + 1, v + 1)).max().unwrap_or(0);
    let bits = 2 * max_index as u64 * (64 - c.leading_zeros() as u64);
    if bits > MAX_DKS_BITS {
        return Err(Error::TooLarge(format!("largest value needs about {bits} bits")));
    }
    let mut atoms: Vec<Vec<(BigRational, BigRational)>> = vec![Vec::new(); n];
    for &(u, v) in graph.edges() {
        let p = BigInt::from(c).pow(pair_index(u + 1, v + 1) as u32);
        let value = int(&p * &p);
        let prob = int(p).recip();
        atoms[u].push((value.clone(), prob.clone()));
        atoms[v].push((value, prob));
    }
    let mut vars = Vec::with_capacity(n);
    for mut a in atoms {
        let used = a.iter().fold(BigRational::zero(), |acc, (_, p)| acc + p);
        if used > BigRational::one() {
            return Err(Error::InvalidInstance(format!("base {c} too small for this graph")));
        }
        a.push((BigRational::zero(), BigRational::one() - used));
        vars.push(RationalDistribution::new(a)?);
    }
    Ok(DensestSubgraphReduction {
        graph: graph.clone(),
        instance: Instance::from_rational(vars, k)?,
        base: c,
    })
}

impl DensestSubgraphReduction {
    /// `l <= E[smax_S] <= l + 1/(2k)` with `l` the internal edge count.
    pub fn check(&self, subset: &[usize]) -> Result<CertificateCheck> {
        let value = self.instance.evaluate_exact(subset, Objective::SecondMax)?;
        let l = int(self.graph.internal_edges(subset) as u64);
        let slack = BigRational::new(1.into(), BigInt::from(2 * subset.len()));
        Ok(CertificateCheck {
            subset: subset.to_vec(),
            value,
            upper: Some(&l + slack),
            lower: Some(l),
        })
    }
}
