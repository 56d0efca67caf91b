//! Approximation scheme for the expected maximum.
//!
//! The instance is simplified in value space (far tails collapsed to one
//! value, small values dropped, the rest rounded to geometric intervals),
//! split into a high-probability core and per-variable tails, and the tails
//! are grouped by their relative profile. The search then guesses how many
//! variables to take from each group.

mod enumerate;
mod preprocess;
mod rel;

pub use enumerate::{allowed_counts, enumerate_and_solve, SearchOutcome, TypeGroup};
pub use preprocess::{
    collapse_far_tail, core_size, core_tail_split, discard_small_values, find_eta_and_core, find_tau,
    interval_count, interval_left_endpoints, round_to_intervals, small_value_cut, Collapsed,
};
pub use rel::{prune_and_round_rel, prune_threshold, round_exponent, RelVector};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::distributions::DiscreteDistribution;
use crate::error::{param, Result};
use crate::exact::Objective;
use crate::instance::Instance;
use crate::selectors::{select_greedy, SelectionResult};

/// Which per-group counts the histogram search tries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    /// Every count `0..=k'`.
    Exact,
    /// Zero, `floor((1 + eps)^j)`, and "all available".
    Geometric,
}

impl std::str::FromStr for CountMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "geometric" => Ok(Self::Geometric),
            _ => Err(crate::Error::Parse(format!("unknown count mode {s:?} (exact|geometric)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtasConfig {
    pub epsilon: f64,
    pub counts: CountMode,
    /// Skip histogram branches that provably cannot win.
    pub prune: bool,
    /// Upper limit on evaluated histograms.
    pub max_histograms: u64,
}

impl PtasConfig {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            counts: CountMode::Exact,
            prune: true,
            max_histograms: 10_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return param(format!("epsilon must be in (0, 1], got {}", self.epsilon));
        }
        Ok(())
    }
}

/// What preprocessing decided, for inspection and debugging.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreprocessTrace {
    pub epsilon: f64,
    pub tau: f64,
    /// `E[X_i | X_i > tau]` per variable, when it has mass above `tau`.
    pub h: Vec<Option<f64>>,
    pub h_max: Option<f64>,
    /// Interval left endpoints followed by `tau`, strictly increasing.
    pub boundaries: Vec<f64>,
    /// Number of intervals prescribed by `epsilon`.
    pub ell: usize,
    pub eta: f64,
    pub core: Vec<usize>,
    pub type_count: usize,
    pub histogram: Vec<(usize, usize)>,
    pub histograms_evaluated: u64,
    /// Set when the search was replaced by a degenerate-case shortcut.
    pub fallback: Option<String>,
}

/// Every intermediate instance of the preprocessing chain.
#[derive(Clone, Debug)]
pub struct Preprocessed {
    /// After collapsing far tails.
    pub x_hat: Vec<DiscreteDistribution>,
    /// After discarding small values.
    pub w: Vec<DiscreteDistribution>,
    /// After interval rounding.
    pub y: Vec<DiscreteDistribution>,
    pub cores: Vec<DiscreteDistribution>,
    pub tails: Vec<DiscreteDistribution>,
    pub rounded_tails: Vec<DiscreteDistribution>,
    pub rel: Vec<RelVector>,
    pub groups: Vec<TypeGroup>,
    pub trace: PreprocessTrace,
}

/// Runs the value-space transforms, the core/tail split and typing.
pub fn preprocess(vars: &[DiscreteDistribution], k: usize, eps: f64) -> Result<Preprocessed> {
    PtasConfig::new(eps).validate()?;
    if k == 0 || k > vars.len() {
        return param(format!("need 1 <= k <= n, got k={k}, n={}", vars.len()));
    }
    let tau = find_tau(vars, k, eps);
    let collapsed = collapse_far_tail(vars, tau);
    let w = discard_small_values(&collapsed.vars, eps, tau);
    let y = round_to_intervals(&w, eps, tau);
    let (eta, core) = find_eta_and_core(&y, eps, k);
    let (cores, tails): (Vec<_>, Vec<_>) = y.iter().map(|x| core_tail_split(x, eta)).unzip();

    let lefts = interval_left_endpoints(eps, tau);
    let mut points = lefts.clone();
    points.push(collapsed.h_max.unwrap_or(f64::INFINITY));
    let (rounded_tails, rel): (Vec<_>, Vec<_>) = tails.iter().map(|t| prune_and_round_rel(t, eps, &points)).unzip();

    let mut in_core = vec![false; vars.len()];
    for &i in &core {
        in_core[i] = true;
    }
    let mut by_type: BTreeMap<Vec<Option<u32>>, Vec<usize>> = BTreeMap::new();
    for (i, r) in rel.iter().enumerate() {
        if !in_core[i] && !r.is_zero() {
            by_type.entry(r.entries.clone()).or_default().push(i);
        }
    }
    let groups: Vec<TypeGroup> = by_type
        .into_iter()
        .map(|(signature, mut members)| {
            members.sort_by(|&i, &j| rel[j].tail_mean.total_cmp(&rel[i].tail_mean).then(i.cmp(&j)));
            TypeGroup { signature, members }
        })
        .collect();

    let mut boundaries = lefts;
    if boundaries.last().is_none_or(|b| *b < tau) && tau > 0.0 {
        boundaries.push(tau);
    }
    let trace = PreprocessTrace {
        epsilon: eps,
        tau,
        h: collapsed.h.clone(),
        h_max: collapsed.h_max,
        boundaries,
        ell: interval_count(eps),
        eta,
        core,
        type_count: groups.len(),
        histogram: Vec::new(),
        histograms_evaluated: 0,
        fallback: None,
    };
    Ok(Preprocessed {
        x_hat: collapsed.vars,
        w,
        y,
        cores,
        tails,
        rounded_tails,
        rel,
        groups,
        trace,
    })
}

/// Selection result together with the preprocessing trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtasOutcome {
    pub result: SelectionResult,
    pub trace: PreprocessTrace,
}

/// Runs the scheme and evaluates the chosen set on the original instance.
pub fn ptas_select(instance: &Instance, cfg: &PtasConfig) -> Result<PtasOutcome> {
    cfg.validate()?;
    let (n, k) = (instance.n(), instance.k());
    if k < 2 {
        return param("the approximation scheme needs k >= 2");
    }
    let pre = preprocess(instance.variables(), k, cfg.epsilon)?;
    let mut trace = pre.trace.clone();
    let subset = if n == k {
        trace.fallback = Some("n = k: all variables selected".into());
        (0..n).collect()
    } else if pre
        .tails
        .iter()
        .enumerate()
        .all(|(i, t)| trace.core.contains(&i) || t.mean() <= 0.0)
    {
        trace.fallback = Some("all tails are zero: greedy on the rounded instance".into());
        let y_instance = Instance::new(pre.y.clone(), k)?;
        select_greedy(&y_instance, Objective::Max)?.subset
    } else {
        let out = enumerate_and_solve(&pre.groups, &pre.rounded_tails, &pre.y, &trace.core, k, cfg)?;
        trace.histogram = out.histogram;
        trace.histograms_evaluated = out.histograms_evaluated;
        out.subset
    };
    let result = SelectionResult::evaluated(instance, subset)?;
    Ok(PtasOutcome { result, trace })
}
