use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::BetaTrace;
use crate::distributions::{ContinuousFamily, DiscreteDistribution, RationalDistribution, Sample};
use crate::error::{param, Result};
use crate::exact::{expected_order_stats, tail_prob_max, tail_prob_smax};
use crate::rng::SeededRng;
use crate::scalar::exact;

/// An inequality `lhs <= rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl BoundCheck {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// Tail-contribution bounds around the tournament thresholds, for
/// continuous families with a monotone hazard rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBoundReport {
    pub epsilon: f64,
    /// `log2(1/epsilon)`.
    pub d: f64,
    /// `sum over non-survivors of Con[X_i >= d beta1] <= 8 sqrt(eps) d beta1`.
    pub sum_of_tails: BoundCheck,
    /// `Con[X_survivor >= d beta2] <= 6 sqrt(eps) d beta2`.
    pub last_variable: BoundCheck,
    /// `sum_i Con[X_i >= d beta] <= 14 sqrt(eps) d beta`, which dominates
    /// the tail of the maximum.
    pub max_surrogate: BoundCheck,
    /// Non-survivor sum at `d beta1` against `8 sqrt(eps) d beta1`, which
    /// dominates the tail of the second maximum.
    pub smax_surrogate: BoundCheck,
    /// Monte Carlo `E[max 1{max >= d beta}]` and its standard error.
    pub max_tail_mc: (f64, f64),
    /// Monte Carlo `E[smax 1{smax >= d beta1}]` and its standard error.
    pub smax_tail_mc: (f64, f64),
}

impl TailBoundReport {
    pub fn all_hold(&self, tol: f64) -> bool {
        [self.sum_of_tails, self.last_variable, self.max_surrogate, self.smax_surrogate]
            .iter()
            .all(|c| c.holds(tol))
    }
}

fn mc_tails(vars: &[ContinuousFamily], cut_max: f64, cut_smax: f64, trials: usize, rng: &mut SeededRng) -> ((f64, f64), (f64, f64)) {
    let mut acc = [(0.0, 0.0); 2];
    for _ in 0..trials {
        let (mut top, mut second) = (0.0f64, 0.0f64);
        for x in vars {
            let v = x.sample(rng);
            if v > top {
                second = top;
                top = v;
            } else if v > second {
                second = v;
            }
        }
        let a = if top >= cut_max { top } else { 0.0 };
        let b = if second >= cut_smax { second } else { 0.0 };
        acc[0].0 += a;
        acc[0].1 += a * a;
        acc[1].0 += b;
        acc[1].1 += b * b;
    }
    let t = trials as f64;
    let stat = |(s, s2): (f64, f64)| {
        let m = s / t;
        (m, (((s2 - t * m * m) / (t - 1.0)).max(0.0) / t).sqrt())
    };
    (stat(acc[0]), stat(acc[1]))
}

/// Evaluates the four tail inequalities at `epsilon` in `(0, 1/16)`; padding
/// variables (indices `>= n`) contribute nothing.
pub fn tail_bound_report(
    vars: &[ContinuousFamily],
    trace: &BetaTrace,
    epsilon: f64,
    mc_trials: usize,
    rng: &mut SeededRng,
) -> Result<TailBoundReport> {
    if !(epsilon > 0.0 && epsilon < 1.0 / 16.0) {
        return param(format!("epsilon must be in (0, 1/16), got {epsilon}"));
    }
    if mc_trials < 2 {
        return param("need at least two Monte Carlo trials");
    }
    let d = (1.0 / epsilon).log2();
    let root = epsilon.sqrt();
    let (b1, b2) = (trace.beta1, trace.beta2);
    let beta = trace.beta();
    let con = |i: usize, x: f64| if i < vars.len() { vars[i].tail_contribution(x) } else { 0.0 };
    let non_survivors: f64 = (0..vars.len()).filter(|&i| i != trace.survivor).map(|i| con(i, d * b1)).sum();
    let sum_of_tails = BoundCheck {
        lhs: non_survivors,
        rhs: 8.0 * root * d * b1,
    };
    let last_variable = BoundCheck {
        lhs: con(trace.survivor, d * b2),
        rhs: 6.0 * root * d * b2,
    };
    let max_surrogate = BoundCheck {
        lhs: (0..vars.len()).map(|i| con(i, d * beta)).sum(),
        rhs: 14.0 * root * d * beta,
    };
    let (max_tail_mc, smax_tail_mc) = mc_tails(vars, d * beta, d * b1, mc_trials, rng);
    Ok(TailBoundReport {
        epsilon,
        d,
        sum_of_tails,
        last_variable,
        max_surrogate,
        smax_surrogate: sum_of_tails,
        max_tail_mc,
        smax_tail_mc,
    })
}

/// Exact probabilities that the maximum reaches `max(beta1, beta2)` and the
/// second maximum reaches `beta1`, over the padded variable list.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityBounds {
    pub p_max: BigRational,
    pub p_smax: BigRational,
}

impl ProbabilityBounds {
    /// `p_max >= 1/2`.
    pub fn max_holds(&self) -> bool {
        self.p_max >= BigRational::new(1.into(), 2.into())
    }

    /// `p_smax >= 0.098`.
    pub fn smax_holds(&self) -> bool {
        self.p_smax >= BigRational::new(98.into(), 1000.into())
    }
}

pub fn probability_lower_bound_check(vars: &[DiscreteDistribution], trace: &BetaTrace) -> Result<ProbabilityBounds> {
    if vars.len() != trace.n {
        return param("trace was computed for a different variable list");
    }
    let mut exact_vars: Vec<RationalDistribution> = vars.iter().map(|x| x.to_rational()).collect();
    exact_vars.resize(trace.k_padded, RationalDistribution::point_mass(BigRational::zero()));
    let refs: Vec<_> = exact_vars.iter().collect();
    Ok(ProbabilityBounds {
        p_max: tail_prob_max(&refs, &exact(trace.beta())),
        p_smax: tail_prob_smax(&refs, &exact(trace.beta1)),
    })
}

/// `g(x) = 1 - (2^x + 1)(1 - 1/sqrt(2^(x+1)))^(2^x)`.
pub fn g_float(x: u32) -> f64 {
    let m = 2f64.powi(x as i32);
    1.0 - (m + 1.0) * (1.0 - 1.0 / (2.0 * m).sqrt()).powf(m)
}

/// `g(x)` exactly, for odd `x` (where `sqrt(2^(x+1))` is an integer).
pub fn g_exact(x: u32) -> Option<BigRational> {
    if x.is_multiple_of(2) {
        return None;
    }
    let m = BigInt::from(1) << x;
    let root = BigInt::from(1) << x.div_ceil(2);
    let base = BigRational::one() - BigRational::new(BigInt::from(1), root);
    let power = num_traits::pow(base, 1usize << x);
    Some(BigRational::one() - BigRational::from_integer(m + 1) * power)
}

/// `1 - (1 - 1/p)^k`.
pub fn top_quantile_max_factor(k: usize, p: f64) -> f64 {
    1.0 - (1.0 - 1.0 / p).powi(k as i32)
}

/// `1 - (k + 1)(1 - 1/p)^(k - 1)`.
pub fn top_quantile_smax_factor(k: usize, p: f64) -> f64 {
    1.0 - (k as f64 + 1.0) * (1.0 - 1.0 / p).powi(k as i32 - 1)
}

/// `2 (d + 14 sqrt(eps) d)` with `d = log2(1/eps)`: the loss factor of
/// truncation for the maximum.
pub fn tail_cut_max_factor(eps: f64) -> f64 {
    let d = (1.0 / eps).log2();
    2.0 * (d + 14.0 * eps.sqrt() * d)
}

/// `(d + 8 sqrt(eps) d) / 0.098`: the loss factor of truncation for the
/// second maximum.
pub fn tail_cut_smax_factor(eps: f64) -> f64 {
    let d = (1.0 / eps).log2();
    (d + 8.0 * eps.sqrt() * d) / 0.098
}

/// `alpha_{p^d} <= d alpha_p`.
pub fn mhr_alpha_scaling(x: &ContinuousFamily, p: f64, d: f64) -> Result<BoundCheck> {
    if d < 1.0 {
        return param(format!("d must be >= 1, got {d}"));
    }
    Ok(BoundCheck {
        lhs: x.quantile_alpha(p.powf(d))?,
        rhs: d * x.quantile_alpha(p)?,
    })
}

/// `Con[X >= alpha_p] <= 6 alpha_p / p` for `p >= 2`.
pub fn mhr_tail_bound(x: &ContinuousFamily, p: f64) -> Result<BoundCheck> {
    if p < 2.0 {
        return param(format!("p must be >= 2, got {p}"));
    }
    let a = x.quantile_alpha(p)?;
    Ok(BoundCheck {
        lhs: x.tail_contribution(a),
        rhs: 6.0 * a / p,
    })
}

/// Exact comparison of the quantile rule against every size-`k` subset on
/// variables truncated at `alpha_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct TopQuantileReport {
    /// The `k` variables with the largest `alpha_p`.
    pub selected: Vec<usize>,
    pub value_max: BigRational,
    pub value_smax: BigRational,
    pub opt_max: BigRational,
    pub opt_smax: BigRational,
    pub factor_max: BigRational,
    pub factor_smax: BigRational,
}

impl TopQuantileReport {
    /// `E[max_S] >= (1 - (1 - 1/p)^k) E[max_A]` for every `A`.
    pub fn max_holds(&self) -> bool {
        self.value_max >= &self.factor_max * &self.opt_max
    }

    /// `E[smax_S] >= (1 - (k + 1)(1 - 1/p)^(k - 1)) E[smax_A]` for every `A`.
    pub fn smax_holds(&self) -> bool {
        self.value_smax >= &self.factor_smax * &self.opt_smax
    }
}

pub fn top_quantile_check(vars: &[RationalDistribution], k: usize, p: &BigRational) -> Result<TopQuantileReport> {
    if k < 2 || k > vars.len() {
        return param(format!("need 2 <= k <= n, got k={k}, n={}", vars.len()));
    }
    let truncated = vars.iter().map(|x| x.truncate_at_quantile(p)).collect::<Result<Vec<_>>>()?;
    let alphas: Vec<BigRational> = truncated.iter().map(|x| x.max_value().clone()).collect();
    let mut order: Vec<usize> = (0..vars.len()).collect();
    order.sort_by(|&i, &j| alphas[j].cmp(&alphas[i]).then(i.cmp(&j)));
    order.truncate(k);
    let stats = |s: &[usize]| {
        let refs: Vec<_> = s.iter().map(|&i| &truncated[i]).collect();
        expected_order_stats(&refs)
    };
    let chosen = stats(&order);
    let (mut opt_max, mut opt_smax) = (BigRational::zero(), BigRational::zero());
    for a in (0..vars.len()).combinations(k) {
        let s = stats(&a);
        opt_max = opt_max.max(s.max);
        opt_smax = opt_smax.max(s.smax);
    }
    let miss = BigRational::one() - p.recip();
    let k_int = BigRational::from_integer(BigInt::from(k));
    Ok(TopQuantileReport {
        selected: order,
        value_max: chosen.max,
        value_smax: chosen.smax,
        opt_max,
        opt_smax,
        factor_max: BigRational::one() - num_traits::pow(miss.clone(), k),
        factor_smax: BigRational::one() - (k_int + BigRational::one()) * num_traits::pow(miss, k - 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anchoring::{compute_beta, compute_beta_continuous};

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn g_at_three() {
        assert_eq!(g_exact(3).unwrap(), r(6487, 65536));
        assert!(g_exact(3).unwrap() >= r(98, 1000));
        assert!((g_float(3) - 6487.0 / 65536.0).abs() < 1e-15);
        assert!(g_exact(2).is_none());
        for x in [1, 5, 7] {
            assert!((crate::scalar::ratio_to_f64(&g_exact(x).unwrap()) - g_float(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn factor_constants() {
        let s2 = 2f64.sqrt();
        assert!((top_quantile_max_factor(2, s2) - 0.9142135623730951).abs() < 1e-12);
        assert!((top_quantile_smax_factor(2, s2) - 0.12132034355964261).abs() < 1e-12);
        assert!(tail_cut_max_factor(0.00075) <= 28.8);
        assert!((tail_cut_max_factor(0.00075) - 28.72).abs() < 0.01);
        assert!(tail_cut_smax_factor(0.0074) <= 122.0);
        assert!((tail_cut_smax_factor(0.0074) - 121.93).abs() < 0.01);
    }

    #[test]
    fn exponential_suite_tail_bounds() {
        let vars = vec![ContinuousFamily::exponential(1.0).unwrap(); 8];
        let trace = compute_beta_continuous(&vars).unwrap();
        let mut rng = SeededRng::new(1);
        for eps in [1.0 / 32.0, 1.0 / 64.0, 1.0 / 256.0] {
            let rep = tail_bound_report(&vars, &trace, eps, 2000, &mut rng).unwrap();
            assert!(rep.all_hold(0.0));
            assert!(rep.max_surrogate.margin() > 0.0);
            // The surrogate dominates the true tail.
            assert!(rep.max_tail_mc.0 <= rep.max_surrogate.lhs + 4.0 * rep.max_tail_mc.1 + 1e-12);
        }
        assert!(tail_bound_report(&vars, &trace, 0.1, 100, &mut rng).is_err());
    }

    #[test]
    fn bounded_support_tails_vanish() {
        let vars = vec![ContinuousFamily::uniform(0.0, 1.0).unwrap(); 4];
        let trace = compute_beta_continuous(&vars).unwrap();
        let mut rng = SeededRng::new(2);
        let rep = tail_bound_report(&vars, &trace, 1.0 / 32.0, 100, &mut rng).unwrap();
        assert_eq!(rep.max_surrogate.lhs, 0.0);
        assert!(rep.all_hold(0.0));
    }

    #[test]
    fn coin_probabilities() {
        let coin = DiscreteDistribution::new([(0.0, 0.5), (3.0, 0.5)]).unwrap();
        let vars = vec![coin; 8];
        let trace = compute_beta(&vars).unwrap();
        let pb = probability_lower_bound_check(&vars, &trace).unwrap();
        assert!(pb.max_holds() && pb.smax_holds());
        let consts = vec![DiscreteDistribution::point_mass(2.0), DiscreteDistribution::point_mass(7.0)];
        let trace = compute_beta(&consts).unwrap();
        assert_eq!(probability_lower_bound_check(&consts, &trace).unwrap().p_max, r(1, 1));
    }

    #[test]
    fn mhr_helpers() {
        let e = ContinuousFamily::exponential(1.0).unwrap();
        let c = mhr_alpha_scaling(&e, 10.0, 3.0).unwrap();
        // Equality for the exponential: 3 ln 10 = ln 1000.
        assert!((c.lhs - c.rhs).abs() < 1e-12);
        assert!(mhr_tail_bound(&e, 4.0).unwrap().holds(1e-12));
        assert!(mhr_tail_bound(&e, 1.5).is_err());
        assert!(mhr_alpha_scaling(&e, 2.0, 0.5).is_err());
    }

    #[test]
    fn top_quantile_small_case() {
        let a = RationalDistribution::new([(r(0, 1), r(1, 2)), (r(4, 1), r(1, 2))]).unwrap();
        let b = RationalDistribution::new([(r(1, 1), r(3, 4)), (r(9, 1), r(1, 4))]).unwrap();
        let c = RationalDistribution::new([(r(2, 1), r(1, 1))]).unwrap();
        let rep = top_quantile_check(&[a, b, c], 2, &r(2, 1)).unwrap();
        assert!(rep.max_holds());
        assert!(rep.smax_holds());
        assert_eq!(rep.factor_max, r(3, 4));
    }
}
