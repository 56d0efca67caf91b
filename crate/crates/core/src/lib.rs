//! Choosing `k` of `n` independent random variables so that the expected
//! largest (or second-largest) realized value is as large as possible.
//!
//! The crate provides exact evaluation of both objectives, simple
//! score-based selectors (quantile, top-quantile expectation, best-of-r,
//! mean), greedy selection, an approximation scheme for the maximum,
//! the quantile-threshold anchoring procedure and its bound checks,
//! hardness-reduction instance generators, and an experiment harness.

pub mod anchoring;
pub mod distributions;
pub mod error;
pub mod exact;
pub mod generators;
pub mod harness;
pub mod instance;
pub mod io;
pub mod ptas;
pub mod rng;
pub mod scalar;
pub mod selectors;

pub use distributions::{ContinuousFamily, Discrete, DiscreteDistribution, RationalDistribution, Sample};
pub use error::{Error, Result};
pub use exact::{NumberMode, Objective, Value};
pub use instance::Instance;
pub use rng::SeededRng;
