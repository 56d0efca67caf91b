//! Exact evaluation of the expected maximum and second maximum of
//! independent discrete variables, brute-force optimum search and a Monte
//! Carlo cross-check.

pub(crate) mod sweep;

pub use sweep::{expected_max, expected_order_stats, expected_smax, tail_prob_max, tail_prob_smax, OrderStats};

use itertools::Itertools;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::distributions::{Discrete, Sample};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rng::SeededRng;
use crate::scalar::Scalar;

/// Largest number of subsets `brute_force_optimum` will enumerate.
pub const MAX_BRUTE_FORCE_SUBSETS: u128 = 20_000_000;

/// Selection objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// `E[max_{i in S} X_i]`.
    Max,
    /// `E[second largest of X_i, i in S]`.
    #[serde(rename = "smax")]
    SecondMax,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Self::Max => "max",
            Self::SecondMax => "smax",
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Self::Max),
            "smax" | "second-max" => Ok(Self::SecondMax),
            _ => Err(Error::Parse(format!("unknown objective {s:?} (max|smax)"))),
        }
    }
}

/// Arithmetic used by evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NumberMode {
    Float64,
    ExactRational,
}

/// An evaluated objective in the requested arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Float(f64),
    Exact(BigRational),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Self::Float(x) => *x,
            Self::Exact(r) => r.to_float(),
        }
    }
}

fn objective_value<T: Scalar>(vars: &[&Discrete<T>], objective: Objective) -> Result<T> {
    match objective {
        Objective::Max => Ok(expected_max(vars)),
        Objective::SecondMax => expected_smax(vars),
    }
}

impl Instance {
    /// Float evaluation of the objective on `subset`.
    pub fn evaluate(&self, subset: &[usize], objective: Objective) -> Result<f64> {
        self.check_subset(subset)?;
        let vars: Vec<_> = subset.iter().map(|&i| self.variable(i)).collect();
        objective_value(&vars, objective)
    }

    /// Both objectives in one sweep; smax of fewer than two variables is 0.
    pub fn order_stats(&self, subset: &[usize]) -> Result<OrderStats<f64>> {
        self.check_subset(subset)?;
        let vars: Vec<_> = subset.iter().map(|&i| self.variable(i)).collect();
        Ok(expected_order_stats(&vars))
    }

    /// Exact rational evaluation of the objective on `subset`.
    pub fn evaluate_exact(&self, subset: &[usize], objective: Objective) -> Result<BigRational> {
        self.check_subset(subset)?;
        let owned: Vec<_> = subset.iter().map(|&i| self.rational_variable(i)).collect();
        let vars: Vec<_> = owned.iter().map(|c| c.as_ref()).collect();
        objective_value(&vars, objective)
    }

    pub fn evaluate_in(&self, subset: &[usize], objective: Objective, mode: NumberMode) -> Result<Value> {
        Ok(match mode {
            NumberMode::Float64 => Value::Float(self.evaluate(subset, objective)?),
            NumberMode::ExactRational => Value::Exact(self.evaluate_exact(subset, objective)?),
        })
    }
}

/// The best size-`k` subset by exhaustive search (lexicographically first
/// among ties) and its value.
pub fn brute_force_optimum(
    instance: &Instance,
    objective: Objective,
    mode: NumberMode,
) -> Result<(Vec<usize>, Value)> {
    let (n, k) = (instance.n(), instance.k());
    if objective == Objective::SecondMax && k < 2 {
        return Err(Error::InvalidParameter("second maximum needs k >= 2".into()));
    }
    let count = binomial(n as u64, k as u64);
    if count > MAX_BRUTE_FORCE_SUBSETS {
        return Err(Error::TooLarge(format!("C({n}, {k}) = {count} subsets")));
    }
    match mode {
        NumberMode::Float64 => {
            let mut best: Option<(Vec<usize>, f64)> = None;
            for s in (0..n).combinations(k) {
                let v = instance.evaluate(&s, objective)?;
                if best.as_ref().is_none_or(|(_, b)| v > *b) {
                    best = Some((s, v));
                }
            }
            let (s, v) = best.expect("at least one subset");
            Ok((s, Value::Float(v)))
        }
        NumberMode::ExactRational => {
            let vars: Vec<_> = (0..n).map(|i| instance.rational_variable(i).into_owned()).collect();
            let mut best: Option<(Vec<usize>, BigRational)> = None;
            for s in (0..n).combinations(k) {
                let refs: Vec<_> = s.iter().map(|&i| &vars[i]).collect();
                let v = objective_value(&refs, objective)?;
                if best.as_ref().is_none_or(|(_, b)| v > *b) {
                    best = Some((s, v));
                }
            }
            let (s, v) = best.expect("at least one subset");
            Ok((s, Value::Exact(v)))
        }
    }
}

pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Sample mean and standard error of the objective over `trials` joint
/// draws of the variables in `subset`.
pub fn monte_carlo(
    instance: &Instance,
    subset: &[usize],
    objective: Objective,
    trials: usize,
    rng: &mut SeededRng,
) -> Result<(f64, f64)> {
    instance.check_subset(subset)?;
    let vars: Vec<_> = subset.iter().map(|&i| instance.variable(i)).collect();
    monte_carlo_samplers(&vars, objective, trials, rng)
}

/// Monte Carlo estimate for any collection of samplers.
pub fn monte_carlo_samplers<S: Sample>(
    vars: &[&S],
    objective: Objective,
    trials: usize,
    rng: &mut SeededRng,
) -> Result<(f64, f64)> {
    if trials < 2 {
        return Err(Error::InvalidParameter("need at least two trials".into()));
    }
    if objective == Objective::SecondMax && vars.len() < 2 {
        return Err(Error::InvalidParameter("second maximum needs at least two variables".into()));
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..trials {
        let (mut top, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for x in vars {
            let v = x.sample(rng);
            if v > top {
                second = top;
                top = v;
            } else if v > second {
                second = v;
            }
        }
        let v = match objective {
            Objective::Max => {
                if vars.is_empty() {
                    0.0
                } else {
                    top
                }
            }
            Objective::SecondMax => second,
        };
        sum += v;
        sum_sq += v * v;
    }
    let t = trials as f64;
    let mean = sum / t;
    let var = ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0);
    Ok((mean, (var / t).sqrt()))
}
