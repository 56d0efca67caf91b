//! The value-space transforms applied before typing: far-tail collapse,
//! small-value discarding, interval rounding and the core/tail split.

use crate::distributions::DiscreteDistribution;

/// Best `c` variables by `Pr[X_i >= v]` (ties lowest index) and the
/// probability that at least one of them reaches `v`.
fn best_reaching(vars: &[DiscreteDistribution], c: usize, v: f64) -> (Vec<usize>, f64) {
    let probs: Vec<f64> = vars.iter().map(|x| x.prob_ge(&v)).collect();
    let mut order: Vec<usize> = (0..vars.len()).collect();
    let cmp = |i: &usize, j: &usize| probs[*j].total_cmp(&probs[*i]).then(i.cmp(j));
    // Called once per binary-search step, so select before sorting.
    if c < order.len() {
        order.select_nth_unstable_by(c, cmp);
        order.truncate(c);
    }
    order.sort_by(cmp);
    let miss: f64 = order.iter().map(|&i| 1.0 - probs[i]).product();
    (order, 1.0 - miss)
}

fn sorted_atoms(vars: &[DiscreteDistribution]) -> Vec<f64> {
    let mut all: Vec<f64> = vars.iter().flat_map(|x| x.values().iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

/// Largest atom `v` such that the `c` variables most likely to reach `v`
/// reach it with probability at least `target`. The smallest atom always
/// qualifies, and feasibility is monotone in `v`, so binary search applies.
fn largest_reachable(vars: &[DiscreteDistribution], c: usize, target: f64) -> f64 {
    let atoms = sorted_atoms(vars);
    let (mut lo, mut hi) = (0usize, atoms.len());
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if best_reaching(vars, c, atoms[mid]).1 >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    atoms[lo]
}

/// `tau`: the largest atom at which the best `k` variables reach `tau` with
/// probability at least `eps`.
pub fn find_tau(vars: &[DiscreteDistribution], k: usize, eps: f64) -> f64 {
    largest_reachable(vars, k, eps)
}

/// Output of [`collapse_far_tail`].
#[derive(Clone, Debug)]
pub struct Collapsed {
    pub vars: Vec<DiscreteDistribution>,
    /// `E[X_i | X_i > tau]` for variables with mass above `tau`.
    pub h: Vec<Option<f64>>,
    /// The largest `h`, if any variable has mass above `tau`.
    pub h_max: Option<f64>,
}

/// Replaces the part of each variable above `tau` by a two-point mix on
/// `{0, H_max}` that keeps the conditional mean `H_i`.
pub fn collapse_far_tail(vars: &[DiscreteDistribution], tau: f64) -> Collapsed {
    let h: Vec<Option<f64>> = vars
        .iter()
        .map(|x| {
            let mass = x.prob_gt(&tau);
            (mass > 0.0).then(|| {
                let c = x.values().partition_point(|v| *v <= tau);
                let contrib: f64 = x.values()[c..].iter().zip(&x.probs()[c..]).map(|(v, p)| v * p).sum();
                contrib / mass
            })
        })
        .collect();
    let h_max = h.iter().flatten().copied().reduce(f64::max);
    let vars = vars
        .iter()
        .zip(&h)
        .map(|(x, hi)| match (hi, h_max) {
            (Some(hi), Some(hm)) => {
                let mass = x.prob_gt(&tau);
                let mut atoms: Vec<(f64, f64)> = x.atoms().filter(|(v, _)| **v <= tau).map(|(v, p)| (*v, *p)).collect();
                let up = (hi / hm).min(1.0);
                atoms.push((hm, mass * up));
                atoms.push((0.0, mass * (1.0 - up)));
                DiscreteDistribution::from_atoms_unchecked(atoms)
            }
            _ => x.clone(),
        })
        .collect();
    Collapsed { vars, h, h_max }
}

/// The cut `eps^2 * tau` below which values are discarded.
pub fn small_value_cut(eps: f64, tau: f64) -> f64 {
    eps * eps * tau
}

/// Moves every atom below `eps^2 * tau` to zero.
pub fn discard_small_values(vars: &[DiscreteDistribution], eps: f64, tau: f64) -> Vec<DiscreteDistribution> {
    let cut = small_value_cut(eps, tau);
    vars.iter()
        .map(|x| {
            if *x.min_value() >= cut || x.values().iter().all(|v| *v == 0.0 || *v >= cut) {
                x.clone()
            } else {
                DiscreteDistribution::from_atoms_unchecked(
                    x.atoms().map(|(v, p)| (if *v < cut { 0.0 } else { *v }, *p)).collect(),
                )
            }
        })
        .collect()
}

/// Number of geometric intervals: the smallest `l >= 1` with
/// `(1 - eps)^l <= eps^2`.
pub fn interval_count(eps: f64) -> usize {
    let target = eps * eps;
    let mut pow = 1.0;
    let mut l = 0;
    loop {
        pow *= 1.0 - eps;
        l += 1;
        if pow <= target {
            return l;
        }
    }
}

/// Left endpoints `eps^2 tau / (1-eps)^j` of the intervals covering
/// `[eps^2 tau, tau]`, all strictly below `tau` (for `eps = 1` the single
/// degenerate interval `[tau, tau]`). Empty when `tau = 0`.
pub fn interval_left_endpoints(eps: f64, tau: f64) -> Vec<f64> {
    if tau <= 0.0 {
        return Vec::new();
    }
    if eps >= 1.0 {
        return vec![tau];
    }
    let mut lefts = Vec::new();
    for j in 0..interval_count(eps) {
        let b = tau * (eps * eps / (1.0 - eps).powi(j as i32));
        if b >= tau || lefts.last().is_some_and(|l| b <= *l) {
            break;
        }
        lefts.push(b);
    }
    lefts
}

/// Rounds each value in `[eps^2 tau, tau]` down to the left endpoint of its
/// interval; the top interval is closed at `tau`.
pub fn round_to_intervals(vars: &[DiscreteDistribution], eps: f64, tau: f64) -> Vec<DiscreteDistribution> {
    let lefts = interval_left_endpoints(eps, tau);
    if lefts.is_empty() {
        return vars.to_vec();
    }
    let round = |v: f64| -> f64 {
        if v < lefts[0] || v > tau {
            return v;
        }
        lefts[lefts.partition_point(|l| *l <= v) - 1]
    };
    vars.iter()
        .map(|x| DiscreteDistribution::from_atoms_unchecked(x.atoms().map(|(v, p)| (round(*v), *p)).collect()))
        .collect()
}

/// Size of the core set: `max(1, floor(eps k))`, at most `k`.
pub fn core_size(eps: f64, k: usize) -> usize {
    ((eps * k as f64 + 1e-9).floor() as usize).clamp(1, k)
}

/// `eta`: the largest atom at which the best `core_size` variables reach it
/// with probability at least `1 - eps`, and that set (ties lowest index).
pub fn find_eta_and_core(vars: &[DiscreteDistribution], eps: f64, k: usize) -> (f64, Vec<usize>) {
    let c = core_size(eps, k);
    let eta = largest_reachable(vars, c, 1.0 - eps);
    let (core, _) = best_reaching(vars, c, eta);
    (eta, core)
}

/// `C = Y 1{Y <= eta}` and `T = Y 1{Y > eta}`, each with the removed mass
/// placed at zero.
pub fn core_tail_split(y: &DiscreteDistribution, eta: f64) -> (DiscreteDistribution, DiscreteDistribution) {
    let core = y.atoms().map(|(v, p)| (if *v <= eta { *v } else { 0.0 }, *p)).collect();
    let tail = y.atoms().map(|(v, p)| (if *v > eta { *v } else { 0.0 }, *p)).collect();
    (
        DiscreteDistribution::from_atoms_unchecked(core),
        DiscreteDistribution::from_atoms_unchecked(tail),
    )
}
