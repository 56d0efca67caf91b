use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::envelope::{Envelope, Stat};
use super::SelectionResult;
use crate::error::{param, Result};
use crate::exact::Objective;
use crate::instance::Instance;

#[derive(Debug)]
struct Candidate {
    gain: f64,
    index: usize,
    round: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Larger gain first, then lower index.
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain.total_cmp(&other.gain).then(other.index.cmp(&self.index))
    }
}

/// Greedy selection: repeatedly add the variable with the largest marginal
/// gain, ties to the lowest index.
///
/// For `Objective::Max` the objective is monotone submodular, so stale gains
/// are upper bounds and a lazy priority queue gives the same picks as
/// recomputing every gain each round. For `Objective::SecondMax` every gain
/// is recomputed each round and the result is flagged `no_guarantee`; the
/// second maximum of a single variable is 0, so the first pick is the
/// variable with the largest mean. `subset` lists the picks in order.
pub fn select_greedy(instance: &Instance, objective: Objective) -> Result<SelectionResult> {
    let subset = match objective {
        Objective::Max => lazy_greedy_max(instance),
        Objective::SecondMax => {
            if instance.k() < 2 {
                return param("second maximum needs k >= 2");
            }
            eager_greedy_smax(instance)
        }
    };
    let mut result = SelectionResult::evaluated(instance, subset)?;
    result.no_guarantee = objective == Objective::SecondMax;
    Ok(result)
}

fn lazy_greedy_max(instance: &Instance) -> Vec<usize> {
    let mut env = Envelope::empty();
    let mut heap: BinaryHeap<Candidate> = instance
        .variables()
        .iter()
        .enumerate()
        .map(|(index, x)| Candidate {
            gain: env.gain(x, Stat::Max),
            index,
            round: 0,
        })
        .collect();
    let mut picks = Vec::with_capacity(instance.k());
    while picks.len() < instance.k() {
        let mut top = heap.pop().expect("k <= n");
        if top.round == picks.len() {
            env.absorb(instance.variable(top.index));
            picks.push(top.index);
        } else {
            top.gain = env.gain(instance.variable(top.index), Stat::Max);
            top.round = picks.len();
            heap.push(top);
        }
    }
    picks
}

fn eager_greedy_smax(instance: &Instance) -> Vec<usize> {
    let n = instance.n();
    let means: Vec<f64> = instance.variables().iter().map(|x| x.mean()).collect();
    let first = super::top_k_by_score(&means, 1)[0];
    let mut chosen = vec![false; n];
    chosen[first] = true;
    let mut env = Envelope::empty();
    env.absorb(instance.variable(first));
    let mut picks = vec![first];
    while picks.len() < instance.k() {
        let mut best: Option<(f64, usize)> = None;
        for i in (0..n).filter(|&i| !chosen[i]) {
            let g = env.gain(instance.variable(i), Stat::SecondMax);
            if best.is_none_or(|(bg, _)| g > bg) {
                best = Some((g, i));
            }
        }
        let (_, i) = best.expect("k <= n");
        chosen[i] = true;
        env.absorb(instance.variable(i));
        picks.push(i);
    }
    picks
}

/// Greedy for the maximum recomputing every gain each round; reference for
/// the lazy version.
#[cfg(test)]
pub(crate) fn eager_greedy_max(instance: &Instance) -> Vec<usize> {
    let n = instance.n();
    let mut chosen = vec![false; n];
    let mut env = Envelope::empty();
    let mut picks = Vec::new();
    while picks.len() < instance.k() {
        let mut best: Option<(f64, usize)> = None;
        for i in (0..n).filter(|&i| !chosen[i]) {
            let g = env.gain(instance.variable(i), Stat::Max);
            if best.is_none_or(|(bg, _)| g > bg) {
                best = Some((g, i));
            }
        }
        let (_, i) = best.unwrap();
        chosen[i] = true;
        env.absorb(instance.variable(i));
        picks.push(i);
    }
    picks
}
