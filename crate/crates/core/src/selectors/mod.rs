//! Score-based selectors and greedy selection.
//!
//! Every score selector ranks variables independently and keeps the top
//! `k` (score descending, index ascending on ties).

mod envelope;
mod greedy;

pub use greedy::select_greedy;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::DiscreteDistribution;
use crate::error::{param, Error, Result};
use crate::exact::Objective;
use crate::instance::Instance;

/// Which selection rule to run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SelectorSpec {
    /// Rank by `alpha_p`, the threshold exceeded with probability `1/p`.
    Quantile { p: f64 },
    /// Rank by `E[X | X in its top q fraction]` with `q` in `(0, 1]`.
    TopQuantileExpectation { q: f64 },
    /// Rank by the expected best of `r` independent copies.
    BestOfSamples { r: u32 },
    /// Rank by `E[X]`.
    Mean,
    /// Greedy on the objective; see [`select_greedy`].
    Greedy { objective: Objective },
}

impl SelectorSpec {
    /// `p = sqrt(k)`.
    pub fn quantile_default(k: usize) -> Self {
        Self::Quantile { p: (k as f64).sqrt() }
    }

    /// `q = 1/k`.
    pub fn top_quantile_default(k: usize) -> Self {
        Self::TopQuantileExpectation { q: 1.0 / k as f64 }
    }

    /// `r = k`.
    pub fn best_of_default(k: usize) -> Self {
        Self::BestOfSamples { r: k as u32 }
    }

    /// Quantile rule from a bottom quantile `b`: `alpha` is exceeded with
    /// probability `1 - b`.
    pub fn quantile_from_bottom(b: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&b) {
            return param(format!("bottom quantile must be in [0, 1), got {b}"));
        }
        Ok(Self::Quantile { p: 1.0 / (1.0 - b) })
    }

    /// Top-quantile expectation from a bottom quantile `b` (top fraction `1 - b`).
    pub fn top_quantile_from_bottom(b: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&b) {
            return param(format!("bottom quantile must be in [0, 1), got {b}"));
        }
        Ok(Self::TopQuantileExpectation { q: 1.0 - b })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Quantile { p } if !(p >= 1.0 && p.is_finite()) => param(format!("quantile p must be >= 1, got {p}")),
            Self::TopQuantileExpectation { q } if !(q > 0.0 && q <= 1.0) => {
                param(format!("top fraction q must be in (0, 1], got {q}"))
            }
            Self::BestOfSamples { r: 0 } => param("best-of r must be >= 1"),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SelectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Quantile { p } => write!(f, "quantile:p={p}"),
            Self::TopQuantileExpectation { q } => write!(f, "kr:q={q}"),
            Self::BestOfSamples { r } => write!(f, "kr-samples:r={r}"),
            Self::Mean => write!(f, "mean"),
            Self::Greedy { objective } => write!(f, "greedy:{}", objective.name()),
        }
    }
}

/// Parses `quantile:p=3`, `kr:q=0.1`, `kr-samples:r=5`, `mean`,
/// `greedy` / `greedy:smax`. Parameters may be omitted for the quantile,
/// top-quantile and best-of rules when `k` is known; use
/// [`SelectorSpec::parse_with_k`] for that.
impl FromStr for SelectorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_k(s, None)
    }
}

impl SelectorSpec {
    pub fn parse_with_k(s: &str, k: Option<usize>) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (s.trim(), None),
        };
        let number = |key: &str| -> Result<Option<f64>> {
            match arg {
                None => Ok(None),
                Some(a) => {
                    let v = a.strip_prefix(key).and_then(|r| r.strip_prefix('=')).unwrap_or(a);
                    v.parse::<f64>()
                        .map(Some)
                        .map_err(|_| Error::Parse(format!("bad parameter {a:?} for {name}")))
                }
            }
        };
        let need_k = || k.ok_or_else(|| Error::Parse(format!("{name} needs an explicit parameter or k")));
        let spec = match name {
            "quantile" => match number("p")? {
                Some(p) => Self::Quantile { p },
                None => Self::quantile_default(need_k()?),
            },
            "kr" | "kr-q" | "top-quantile" => match number("q")? {
                Some(q) => Self::TopQuantileExpectation { q },
                None => Self::top_quantile_default(need_k()?),
            },
            "kr-samples" | "best-of" => match number("r")? {
                Some(r) if r >= 1.0 && r.fract() == 0.0 => Self::BestOfSamples { r: r as u32 },
                Some(r) => return Err(Error::Parse(format!("best-of r must be a positive integer, got {r}"))),
                None => Self::best_of_default(need_k()?),
            },
            "mean" | "expectation" => Self::Mean,
            "greedy" => Self::Greedy {
                objective: match arg {
                    None => Objective::Max,
                    Some(o) => o.parse()?,
                },
            },
            _ => return Err(Error::Parse(format!("unknown selector {name:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Outcome of a selection rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Chosen indices in rank (or pick) order.
    pub subset: Vec<usize>,
    pub value_max: f64,
    /// `None` when fewer than two variables were selected.
    pub value_smax: Option<f64>,
    /// Per-variable scores for score-based rules.
    pub scores: Option<Vec<f64>>,
    /// Set when the rule carries no approximation guarantee for the
    /// objective it optimized.
    pub no_guarantee: bool,
}

impl SelectionResult {
    pub(crate) fn evaluated(instance: &Instance, subset: Vec<usize>) -> Result<Self> {
        let stats = instance.order_stats(&subset)?;
        Ok(Self {
            value_smax: (subset.len() >= 2).then_some(stats.smax),
            value_max: stats.max,
            subset,
            scores: None,
            no_guarantee: false,
        })
    }

    pub fn sorted_subset(&self) -> Vec<usize> {
        let mut s = self.subset.clone();
        s.sort_unstable();
        s
    }

    pub fn value(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Max => self.value_max,
            Objective::SecondMax => self.value_smax.unwrap_or(0.0),
        }
    }
}

/// `E[X | X in its top q fraction]`, splitting the boundary atom.
pub fn top_quantile_expectation(x: &DiscreteDistribution, q: f64) -> f64 {
    let mut remaining = q;
    let mut acc = 0.0;
    for (v, p) in x.values().iter().zip(x.probs()).rev() {
        let take = p.min(remaining);
        acc += v * take;
        remaining -= take;
        if remaining <= 0.0 {
            break;
        }
    }
    acc / q
}

/// `E[max of r independent copies of X] = sum_v v (F(v)^r - F(v-)^r)`.
pub fn best_of_samples(x: &DiscreteDistribution, r: u32) -> f64 {
    let mut prev = 0.0f64;
    let mut acc = 0.0;
    for (v, f) in x.values().iter().zip(x.cdf_at_atoms()) {
        let cur = f.powi(r as i32);
        acc += v * (cur - prev);
        prev = cur;
    }
    acc
}

/// The score of one variable under a score-based rule.
pub fn score(x: &DiscreteDistribution, spec: &SelectorSpec) -> Result<f64> {
    spec.validate()?;
    match *spec {
        SelectorSpec::Quantile { p } => x.quantile_alpha(&p),
        SelectorSpec::TopQuantileExpectation { q } => Ok(top_quantile_expectation(x, q)),
        SelectorSpec::BestOfSamples { r } => Ok(best_of_samples(x, r)),
        SelectorSpec::Mean => Ok(x.mean()),
        SelectorSpec::Greedy { .. } => param("greedy has no per-variable score"),
    }
}

/// Indices of the `k` largest scores, score descending then index ascending.
pub fn top_k_by_score(scores: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]).then(i.cmp(&j)));
    order.truncate(k);
    order
}

/// Runs a score-based rule (or greedy) and evaluates the chosen set exactly.
pub fn select_by_score(instance: &Instance, spec: &SelectorSpec) -> Result<SelectionResult> {
    if let SelectorSpec::Greedy { objective } = *spec {
        return select_greedy(instance, objective);
    }
    let scores = instance
        .variables()
        .iter()
        .map(|x| score(x, spec))
        .collect::<Result<Vec<_>>>()?;
    let subset = top_k_by_score(&scores, instance.k());
    let mut result = SelectionResult::evaluated(instance, subset)?;
    result.scores = Some(scores);
    Ok(result)
}

/// Top `k` by `alpha_p`.
pub fn select_quantile(instance: &Instance, p: f64) -> Result<SelectionResult> {
    select_by_score(instance, &SelectorSpec::Quantile { p })
}

/// Top `k` by the expectation over the top `q` fraction.
pub fn select_kr_top_quantile(instance: &Instance, q: f64) -> Result<SelectionResult> {
    select_by_score(instance, &SelectorSpec::TopQuantileExpectation { q })
}

/// Top `k` by the expected best of `r` copies.
pub fn select_kr_best_of_samples(instance: &Instance, r: u32) -> Result<SelectionResult> {
    select_by_score(instance, &SelectorSpec::BestOfSamples { r })
}

/// Top `k` by mean.
pub fn select_expectation(instance: &Instance) -> Result<SelectionResult> {
    select_by_score(instance, &SelectorSpec::Mean)
}
