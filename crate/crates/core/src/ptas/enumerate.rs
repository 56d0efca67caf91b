//! Search over type histograms.

use serde::{Deserialize, Serialize};

use super::{CountMode, PtasConfig};
use crate::distributions::DiscreteDistribution;
use crate::error::{Error, Result};

/// Variables sharing one relative tail profile, best tail mean first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeGroup {
    pub signature: Vec<Option<u32>>,
    pub members: Vec<usize>,
}

/// Result of [`enumerate_and_solve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    /// Core, chosen tail candidates, then padding; length `k`.
    pub subset: Vec<usize>,
    /// `(group index, count)` for every group with a nonzero count.
    pub histogram: Vec<(usize, usize)>,
    /// Value of the surrogate objective for the chosen histogram.
    pub surrogate_value: f64,
    /// Histograms whose surrogate value was computed.
    pub histograms_evaluated: u64,
}

/// Counts tried for a group with `avail` members, ascending, zero excluded.
pub fn allowed_counts(mode: CountMode, k_prime: usize, avail: usize, eps: f64) -> Vec<usize> {
    let m = avail.min(k_prime);
    match mode {
        CountMode::Exact => (1..=m).collect(),
        CountMode::Geometric => {
            let mut out = Vec::new();
            let mut x = 1.0f64;
            while x.floor() as usize <= m {
                out.push(x.floor() as usize);
                x *= 1.0 + eps;
            }
            if m > 0 {
                out.push(m);
            }
            out.sort_unstable();
            out.dedup();
            out
        }
    }
}

/// `E[max]` of a distribution given by its CDF on `grid`.
fn expectation(grid: &[f64], cdf: &[f64]) -> f64 {
    let mut prev = 0.0;
    let mut acc = 0.0;
    for (v, f) in grid.iter().zip(cdf) {
        acc += v * (f - prev);
        prev = *f;
    }
    acc
}

fn times(p: &mut [f64], f: &[f64]) {
    for (a, b) in p.iter_mut().zip(f) {
        *a *= b;
    }
}

struct Search<'a> {
    grid: &'a [f64],
    cdfs: Vec<Vec<Vec<f64>>>,
    counts: Vec<Vec<usize>>,
    /// `top[t][b]`: sum of the `b` largest standalone gains among groups
    /// `t..`, an upper bound on what `b` more picks from them can add.
    top: Vec<Vec<f64>>,
    prune: bool,
    cap: u64,
    evaluated: u64,
    bound: f64,
    best: Option<(f64, Vec<(usize, usize)>)>,
    path: Vec<(usize, usize)>,
}

impl Search<'_> {
    fn top_sum(&self, t: usize, b: usize) -> f64 {
        let row = &self.top[t];
        row[b.min(row.len() - 1)]
    }

    fn hopeless(&self, ub: f64) -> bool {
        self.prune && ub < self.bound * (1.0 - 1e-9)
    }

    fn visit(&mut self, t_start: usize, p: &[f64], budget: usize) -> Result<()> {
        self.evaluated += 1;
        if self.evaluated > self.cap {
            return Err(Error::TooLarge(format!(
                "more than {} type histograms; raise max_histograms or use geometric counts",
                self.cap
            )));
        }
        let value = expectation(self.grid, p);
        if self.best.as_ref().is_none_or(|(b, _)| value > *b) {
            self.best = Some((value, self.path.clone()));
        }
        self.bound = self.bound.max(value);
        if budget == 0 {
            return Ok(());
        }
        let mut q = vec![0.0; p.len()];
        for t in t_start..self.cdfs.len() {
            if self.hopeless(value + self.top_sum(t, budget)) {
                break;
            }
            q.copy_from_slice(p);
            let mut taken = 0;
            for ci in 0..self.counts[t].len() {
                let c = self.counts[t][ci];
                if c > budget {
                    break;
                }
                while taken < c {
                    times(&mut q, &self.cdfs[t][taken]);
                    taken += 1;
                }
                if self.hopeless(expectation(self.grid, &q) + self.top_sum(t + 1, budget - c)) {
                    continue;
                }
                self.path.push((t, c));
                let child = q.clone();
                self.visit(t + 1, &child, budget - c)?;
                self.path.pop();
            }
        }
        Ok(())
    }
}

/// Tries every histogram of per-group counts (from the configured count
/// set, at most `k_prime` in total), forms the candidate set from the top
/// members of each group, and scores `E[max(T_hat over candidates, Y over
/// the core)]`. The best candidate set (first in enumeration order among
/// equal values) joins the core and is padded to `k` by largest `E[Y_i]`.
///
/// With `cfg.prune`, branches whose submodular upper bound falls below the
/// best value found are skipped; this never changes the answer.
#[allow(clippy::too_many_arguments)]
pub fn enumerate_and_solve(
    groups: &[TypeGroup],
    rounded_tails: &[DiscreteDistribution],
    y: &[DiscreteDistribution],
    core: &[usize],
    k: usize,
    cfg: &PtasConfig,
) -> Result<SearchOutcome> {
    let k_prime = k.saturating_sub(core.len());
    let eps = cfg.epsilon;

    let mut grid: Vec<f64> = core
        .iter()
        .flat_map(|&i| y[i].values().iter().copied())
        .chain(groups.iter().flat_map(|g| g.members.iter().flat_map(|&i| rounded_tails[i].values().iter().copied())))
        .collect();
    grid.push(0.0);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let on_grid = |x: &DiscreteDistribution| -> Vec<f64> { grid.iter().map(|v| x.cdf(v)).collect() };

    let mut base = vec![1.0; grid.len()];
    for &i in core {
        times(&mut base, &on_grid(&y[i]));
    }
    let base_value = expectation(&grid, &base);

    let cdfs: Vec<Vec<Vec<f64>>> = groups
        .iter()
        .map(|g| g.members.iter().take(k_prime).map(|&i| on_grid(&rounded_tails[i])).collect())
        .collect();
    let counts: Vec<Vec<usize>> = groups
        .iter()
        .map(|g| allowed_counts(cfg.counts, k_prime, g.members.len(), eps))
        .collect();

    let gain = |p: &[f64], f: &[f64]| -> f64 {
        let mut q = p.to_vec();
        times(&mut q, f);
        (expectation(&grid, &q) - expectation(&grid, p)).max(0.0)
    };
    let mut top = vec![vec![0.0]; groups.len() + 1];
    let mut suffix: Vec<f64> = Vec::new();
    for t in (0..groups.len()).rev() {
        suffix.extend(cdfs[t].iter().map(|f| gain(&base, f)));
        suffix.sort_by(|a, b| b.total_cmp(a));
        suffix.truncate(k_prime);
        let mut sums = vec![0.0];
        for g in &suffix {
            sums.push(sums.last().unwrap() + g);
        }
        top[t] = sums;
    }

    // A greedy histogram gives an initial value to prune against.
    let mut seed_bound = base_value;
    if cfg.prune && k_prime > 0 && !groups.is_empty() {
        let mut taken = vec![0usize; groups.len()];
        let mut p = base.clone();
        for _ in 0..k_prime {
            let mut best: Option<(f64, usize)> = None;
            for t in 0..groups.len() {
                if taken[t] < cdfs[t].len() {
                    let g = gain(&p, &cdfs[t][taken[t]]);
                    if best.is_none_or(|(bg, _)| g > bg) {
                        best = Some((g, t));
                    }
                }
            }
            match best {
                Some((g, t)) if g > 0.0 => {
                    times(&mut p, &cdfs[t][taken[t]]);
                    taken[t] += 1;
                }
                _ => break,
            }
        }
        let mut q = base.clone();
        for t in 0..groups.len() {
            let c = counts[t].iter().rev().find(|&&c| c <= taken[t]).copied().unwrap_or(0);
            for f in &cdfs[t][..c] {
                times(&mut q, f);
            }
        }
        seed_bound = expectation(&grid, &q);
    }

    let mut search = Search {
        grid: &grid,
        cdfs,
        counts,
        top,
        prune: cfg.prune,
        cap: cfg.max_histograms,
        evaluated: 0,
        bound: seed_bound,
        best: None,
        path: Vec::new(),
    };
    search.visit(0, &base, k_prime)?;
    let (surrogate_value, histogram) = search.best.expect("the empty histogram is always evaluated");

    let mut subset = core.to_vec();
    for &(t, c) in &histogram {
        subset.extend_from_slice(&groups[t].members[..c]);
    }
    let mut used = vec![false; y.len()];
    for &i in &subset {
        used[i] = true;
    }
    let means: Vec<f64> = y.iter().map(|x| x.mean()).collect();
    let mut rest: Vec<usize> = (0..y.len()).filter(|&i| !used[i]).collect();
    rest.sort_by(|&i, &j| means[j].total_cmp(&means[i]).then(i.cmp(&j)));
    subset.extend(rest.into_iter().take(k.saturating_sub(subset.len())));

    Ok(SearchOutcome {
        subset,
        histogram,
        surrogate_value,
        histograms_evaluated: search.evaluated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_sets() {
        assert_eq!(allowed_counts(CountMode::Exact, 5, 3, 0.5), vec![1, 2, 3]);
        assert_eq!(allowed_counts(CountMode::Geometric, 10, 20, 0.5), vec![1, 2, 3, 5, 7, 10]);
        assert_eq!(allowed_counts(CountMode::Geometric, 10, 4, 1.0), vec![1, 2, 4]);
        assert!(allowed_counts(CountMode::Exact, 0, 3, 0.5).is_empty());
    }
}
