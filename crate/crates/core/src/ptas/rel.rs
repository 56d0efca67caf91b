//! Relative tail profiles ("types") of the tail variables.

use serde::{Deserialize, Serialize};

use crate::distributions::DiscreteDistribution;

/// How a tail variable's mean is spread across the value intervals.
///
/// Entry `j` is `None` (no contribution) or `Some(z)`, meaning the interval
/// holds a `(1 - eps)^z` share of `E[T_i]` after pruning and rounding. The
/// last entry is the collapsed far-tail value `H_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelVector {
    pub entries: Vec<Option<u32>>,
    /// `E[T_i]` before pruning.
    pub tail_mean: f64,
}

impl RelVector {
    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Option::is_none)
    }

    /// Entries as reals.
    pub fn values(&self, eps: f64) -> Vec<f64> {
        self.entries
            .iter()
            .map(|e| e.map_or(0.0, |z| (1.0 - eps).powi(z as i32)))
            .collect()
    }
}

/// Pruning threshold `eps^(1/eps + 3)` on relative contributions.
pub fn prune_threshold(eps: f64) -> f64 {
    eps.powf(1.0 / eps + 3.0)
}

/// Smallest `z >= 0` with `(1 - eps)^z <= rel`, for `rel` in `(0, 1]`.
pub fn round_exponent(rel: f64, eps: f64) -> u32 {
    let base = 1.0 - eps;
    if rel >= 1.0 {
        return 0;
    }
    if base <= 0.0 {
        // Only z = 0 gives a nonzero power; anything below 1 rounds to 0.
        return u32::MAX;
    }
    let mut z = (rel.ln() / base.ln()).ceil().max(0.0) as i32;
    while base.powi(z) > rel {
        z += 1;
    }
    while z > 0 && base.powi(z - 1) <= rel {
        z -= 1;
    }
    z as u32
}

/// Builds `T_hat` and the relative profile of a tail variable whose atoms
/// lie on `points` (interval left endpoints followed by `H_max`) or at zero.
///
/// Each point's contribution `v Pr[T = v]` relative to `E[T]` is zeroed when
/// at most the pruning threshold, and otherwise rounded down to a power of
/// `1 - eps` by shrinking its probability; the freed mass moves to zero.
pub fn prune_and_round_rel(t: &DiscreteDistribution, eps: f64, points: &[f64]) -> (DiscreteDistribution, RelVector) {
    let mean = t.mean();
    let mut entries = vec![None; points.len()];
    if mean <= 0.0 {
        return (DiscreteDistribution::point_mass(0.0), RelVector { entries, tail_mean: 0.0 });
    }
    let threshold = prune_threshold(eps);
    let mut atoms = Vec::new();
    let mut kept = 0.0;
    for (v, p) in t.atoms().filter(|(v, _)| **v > 0.0) {
        let j = points
            .iter()
            .position(|x| x == v)
            .expect("tail atoms lie on the interval grid");
        let rel = v * p / mean;
        if rel <= threshold {
            continue;
        }
        let z = round_exponent(rel, eps);
        if z == u32::MAX {
            continue;
        }
        entries[j] = Some(z);
        let prob = ((1.0 - eps).powi(z as i32) * mean / v).min(*p);
        kept += prob;
        atoms.push((*v, prob));
    }
    atoms.push((0.0, (1.0 - kept).max(0.0)));
    (
        DiscreteDistribution::from_atoms_unchecked(atoms),
        RelVector { entries, tail_mean: mean },
    )
}
