//! Instance generators: the two hardness reductions (built in exact
//! arithmetic), the clipped-normal experiment families, random graphs and a
//! few fixed instances.

mod graph;
mod reductions;

pub use graph::Graph;
pub use reductions::{
    gen_densest_subgraph_instance, gen_independent_set_instance, pair_index, CertificateCheck, DensestSubgraphReduction,
    DksBase, IndependentSetReduction, MAX_DKS_BITS, MAX_IS_EDGES,
};

use num_rational::BigRational;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::distributions::{ContinuousFamily, DiscreteDistribution, RationalDistribution};
use crate::error::{param, Result};
use crate::instance::Instance;
use crate::rng::SeededRng;

/// Parameters of the clipped-normal family: each variable is the empirical
/// distribution of `draws` samples of `N(mu, sigma)` clipped to `[0, v_max]`,
/// with `mu` and `sigma` uniform over their ranges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClippedNormalParams {
    pub mu_range: (f64, f64),
    pub sigma_range: (f64, f64),
    pub draws: usize,
    pub v_max: f64,
}

impl Default for ClippedNormalParams {
    fn default() -> Self {
        Self {
            mu_range: (0.0, 60.0),
            sigma_range: (0.0, 30.0),
            draws: 5000,
            v_max: 1000.0,
        }
    }
}

impl ClippedNormalParams {
    fn validate(&self) -> Result<()> {
        let ok_range = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        if !ok_range(self.mu_range) || !ok_range(self.sigma_range) || self.sigma_range.0 < 0.0 {
            return param("mu_range and sigma_range must be finite lo <= hi, sigma >= 0");
        }
        if self.draws == 0 || !(self.v_max > 0.0) {
            return param("draws must be >= 1 and v_max > 0");
        }
        Ok(())
    }

    // Sigma is drawn from (lo, hi] so a true normal always exists.
    fn draw_family(&self, rng: &mut SeededRng) -> (f64, f64) {
        let mu = rng.uniform(self.mu_range.0, self.mu_range.1);
        let (lo, hi) = self.sigma_range;
        let sigma = hi - (hi - lo) * rng.unit();
        (mu, sigma)
    }

    fn empirical(&self, mu: f64, sigma: f64, draws: usize, rng: &mut SeededRng) -> Result<DiscreteDistribution> {
        let normal = Normal::new(mu, sigma).map_err(|e| crate::Error::InvalidParameter(e.to_string()))?;
        let samples: Vec<f64> = (0..draws).map(|_| normal.sample(rng).clamp(0.0, self.v_max)).collect();
        DiscreteDistribution::empirical(&samples)
    }
}

pub fn gen_clipped_normal_instance(n: usize, k: usize, rng: &mut SeededRng, params: &ClippedNormalParams) -> Result<Instance> {
    params.validate()?;
    let mut vars = Vec::with_capacity(n);
    for _ in 0..n {
        let (mu, sigma) = params.draw_family(rng);
        vars.push(params.empirical(mu, sigma, params.draws, rng)?);
    }
    Instance::new(vars, k)
}

pub const SMALL_LABEL: &str = "small";
pub const BIG_LABEL: &str = "big";

/// A clipped-normal instance where each variable saw either few or many
/// samples, plus the underlying normals for scoring true performance.
#[derive(Clone, Debug)]
pub struct BiasInstance {
    pub instance: Instance,
    pub families: Vec<ContinuousFamily>,
    pub small: Vec<bool>,
}

pub fn gen_bias_instance(
    n: usize,
    k: usize,
    rng: &mut SeededRng,
    params: &ClippedNormalParams,
    small_draws: usize,
    big_draws: usize,
) -> Result<BiasInstance> {
    params.validate()?;
    if small_draws == 0 || big_draws == 0 {
        return param("draw counts must be positive");
    }
    let mut vars = Vec::with_capacity(n);
    let mut families = Vec::with_capacity(n);
    let mut small = Vec::with_capacity(n);
    for _ in 0..n {
        let (mu, sigma) = params.draw_family(rng);
        let is_small = rng.bernoulli(0.5);
        let draws = if is_small { small_draws } else { big_draws };
        vars.push(params.empirical(mu, sigma, draws, rng)?);
        families.push(ContinuousFamily::normal(mu, sigma)?);
        small.push(is_small);
    }
    let labels = small
        .iter()
        .map(|&s| Some(if s { SMALL_LABEL } else { BIG_LABEL }.to_string()))
        .collect();
    Ok(BiasInstance {
        instance: Instance::new(vars, k)?.with_labels(labels)?,
        families,
        small,
    })
}

/// Two-point variables (0, or a value in `[1, 100)` with probability in
/// `[0.01, 0.3)`), used for timing the approximation scheme: each variable
/// has a single positive value, so the number of tail types stays bounded
/// as `n` grows.
pub fn gen_scaling_instance(n: usize, k: usize, rng: &mut SeededRng) -> Result<Instance> {
    if n == 0 {
        return param("n must be positive");
    }
    let vars = (0..n)
        .map(|_| {
            let v = rng.uniform(1.0, 100.0);
            let q = rng.uniform(0.01, 0.3);
            DiscreteDistribution::new([(0.0, 1.0 - q), (v, q)])
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(vars, k)
}

/// Twenty risky variables (10 with probability 1/10, else 0) followed by
/// twenty safe ones (always 11/10), with `k = 10`.
pub fn team_example() -> Instance {
    let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let risky = RationalDistribution::new([(r(0, 1), r(9, 10)), (r(10, 1), r(1, 10))]).expect("valid");
    let safe = RationalDistribution::point_mass(r(11, 10));
    let mut vars = vec![risky; 20];
    vars.extend(std::iter::repeat_n(safe, 20));
    Instance::from_rational(vars, 10).expect("valid")
}

/// Random discrete instance: each variable has 1 to `max_support` atoms
/// with values uniform in `[0, scale)` (scale 5, or 50 for about a third of
/// the variables) and random weights.
pub fn gen_random_discrete(n: usize, k: usize, max_support: usize, rng: &mut SeededRng) -> Result<Instance> {
    if max_support == 0 {
        return param("max_support must be >= 1");
    }
    let vars = (0..n)
        .map(|_| {
            let m = rng.int_in(1, max_support as u64) as usize;
            let w: Vec<f64> = (0..m).map(|_| rng.uniform(0.05, 1.0)).collect();
            let total: f64 = w.iter().sum();
            let scale = if rng.bernoulli(0.3) { 50.0 } else { 5.0 };
            DiscreteDistribution::new(w.iter().map(|p| (rng.uniform(0.0, scale), p / total)).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(vars, k)
}

/// Random exact instance: integer values in `0..=max_value` and integer
/// weights `1..=9` normalized exactly.
pub fn gen_random_rational(
    n: usize,
    k: usize,
    max_support: usize,
    max_value: u64,
    rng: &mut SeededRng,
) -> Result<Instance> {
    if max_support == 0 {
        return param("max_support must be >= 1");
    }
    let vars = (0..n)
        .map(|_| {
            let m = rng.int_in(1, max_support as u64) as usize;
            let w: Vec<u64> = (0..m).map(|_| rng.int_in(1, 9)).collect();
            let total: u64 = w.iter().sum();
            RationalDistribution::new(w.iter().map(|&wi| {
                (
                    BigRational::from_integer(rng.int_in(0, max_value).into()),
                    BigRational::new(wi.into(), total.into()),
                )
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::from_rational(vars, k)
}

/// A random exponential, uniform or normal family.
pub fn random_mhr_family(rng: &mut SeededRng) -> ContinuousFamily {
    let family = match rng.int_in(0, 2) {
        0 => ContinuousFamily::exponential(rng.uniform(0.2, 3.0)),
        1 => {
            let a = rng.uniform(0.0, 5.0);
            ContinuousFamily::uniform(a, a + rng.uniform(0.5, 10.0))
        }
        _ => ContinuousFamily::normal(rng.uniform(2.0, 20.0), rng.uniform(0.5, 6.0)),
    };
    family.expect("parameters in range")
}

/// Random monotone-hazard-rate families discretized on a grid of `grid`
/// up to the value exceeded with probability `1e-6`.
pub fn gen_mhr_instance(n: usize, k: usize, grid: f64, rng: &mut SeededRng) -> Result<(Instance, Vec<ContinuousFamily>)> {
    let families: Vec<ContinuousFamily> = (0..n).map(|_| random_mhr_family(rng)).collect();
    let vars = families
        .iter()
        .map(|f| f.discretize(grid, f.quantile_alpha(1e6)?.max(grid)))
        .collect::<Result<Vec<_>>>()?;
    Ok((Instance::new(vars, k)?, families))
}
