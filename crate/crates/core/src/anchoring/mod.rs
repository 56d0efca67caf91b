//! The quantile elimination tournament that produces the anchoring
//! thresholds `beta1` (second maximum) and `beta2` (last survivor), and
//! executable forms of the bounds attached to them.

mod bounds;

pub use bounds::{
    g_exact, g_float, top_quantile_check, top_quantile_max_factor, top_quantile_smax_factor, tail_cut_max_factor, tail_cut_smax_factor,
    mhr_alpha_scaling, mhr_tail_bound, probability_lower_bound_check, tail_bound_report, BoundCheck, TopQuantileReport,
    ProbabilityBounds, TailBoundReport,
};

use serde::{Deserialize, Serialize};

use crate::distributions::{ContinuousFamily, DiscreteDistribution};
use crate::error::{param, Result};

/// One elimination round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaRound {
    /// Quantile parameter `sqrt(K / 2^t)`.
    pub q: f64,
    /// The pool sorted by `alpha_q`, descending, ties to the lower index.
    pub order: Vec<usize>,
    /// The top half of `order`.
    pub survivors: Vec<usize>,
    /// `alpha_q` of the best eliminated variable.
    pub beta: f64,
}

/// Full record of the tournament. Indices `>= n` are zero padding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaTrace {
    pub n: usize,
    pub k_padded: usize,
    pub rounds: Vec<BetaRound>,
    pub survivor: usize,
    /// `beta1 = max_t beta_t`.
    pub beta1: f64,
    /// `beta2 = alpha_sqrt(2)` of the survivor.
    pub beta2: f64,
}

impl BetaTrace {
    /// `max(beta1, beta2)`.
    pub fn beta(&self) -> f64 {
        self.beta1.max(self.beta2)
    }

    /// Round in which variable `i` was eliminated; the survivor gets
    /// `rounds.len()`.
    pub fn elimination_round(&self, i: usize) -> usize {
        self.rounds
            .iter()
            .position(|r| r.order.contains(&i) && !r.survivors.contains(&i))
            .unwrap_or(self.rounds.len())
    }

    /// Eliminated in round `t` (or the survivor for `t = rounds.len()`).
    pub fn group(&self, t: usize) -> Vec<usize> {
        if t == self.rounds.len() {
            return vec![self.survivor];
        }
        let r = &self.rounds[t];
        r.order.iter().filter(|i| !r.survivors.contains(i)).copied().collect()
    }
}

/// Runs the tournament given `alpha(i, p)` for the `n` real variables;
/// padding variables have every quantile equal to zero.
pub fn compute_beta_with(n: usize, alpha: impl Fn(usize, f64) -> Result<f64>) -> Result<BetaTrace> {
    if n == 0 {
        return param("compute_beta needs at least one variable");
    }
    let k = n.next_power_of_two().max(2);
    let alpha = |i: usize, p: f64| -> Result<f64> { if i < n { alpha(i, p) } else { Ok(0.0) } };
    let mut pool: Vec<usize> = (0..k).collect();
    let mut rounds = Vec::new();
    let mut t = 0u32;
    while pool.len() > 1 {
        let q = (k as f64 / 2f64.powi(t as i32)).sqrt();
        let scores = pool.iter().map(|&i| alpha(i, q)).collect::<Result<Vec<_>>>()?;
        let mut ranked: Vec<(usize, f64)> = pool.iter().copied().zip(scores).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let half = ranked.len() / 2;
        let order: Vec<usize> = ranked.iter().map(|r| r.0).collect();
        let survivors = order[..half].to_vec();
        rounds.push(BetaRound {
            q,
            beta: ranked[half].1,
            order,
            survivors: survivors.clone(),
        });
        pool = survivors;
        t += 1;
    }
    let survivor = pool[0];
    let beta2 = alpha(survivor, std::f64::consts::SQRT_2)?;
    let beta1 = rounds.iter().map(|r| r.beta).fold(f64::NEG_INFINITY, f64::max);
    Ok(BetaTrace {
        n,
        k_padded: k,
        rounds,
        survivor,
        beta1,
        beta2,
    })
}

/// The tournament on discrete variables.
pub fn compute_beta(vars: &[DiscreteDistribution]) -> Result<BetaTrace> {
    compute_beta_with(vars.len(), |i, p| vars[i].quantile_alpha(&p))
}

/// The tournament on continuous families, using their closed-form quantiles.
pub fn compute_beta_continuous(vars: &[ContinuousFamily]) -> Result<BetaTrace> {
    compute_beta_with(vars.len(), |i, p| vars[i].quantile_alpha(p))
}

/// The truncation point `sqrt(K)` for `K` the padded size.
pub fn truncation_parameter(n: usize) -> f64 {
    (n.next_power_of_two().max(2) as f64).sqrt()
}

/// Recomputes the tournament on every variable truncated at
/// `alpha_sqrt(K)` and reports whether the trace is identical. The
/// tournament only asks for quantiles at or above that level, so it should
/// be.
pub fn truncation_equivariance_check(vars: &[DiscreteDistribution], trace: &BetaTrace) -> Result<bool> {
    let p = truncation_parameter(vars.len());
    let truncated = vars
        .iter()
        .map(|x| x.truncate_at_quantile(&p))
        .collect::<Result<Vec<_>>>()?;
    Ok(compute_beta(&truncated)? == *trace)
}
