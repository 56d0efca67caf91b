//! Random variable representations: finite discrete distributions (in
//! float or exact rational arithmetic) and the continuous families used by
//! the experiments and the tail-bound checks.

mod continuous;
mod discrete;

pub use continuous::ContinuousFamily;
pub use discrete::{Discrete, DiscreteDistribution, RationalDistribution};

use crate::rng::SeededRng;

/// Anything that can produce independent draws.
pub trait Sample {
    fn sample(&self, rng: &mut SeededRng) -> f64;
}
