use itertools::Itertools;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::anchoring::{
    compute_beta, compute_beta_continuous, top_quantile_check, mhr_alpha_scaling, mhr_tail_bound,
    probability_lower_bound_check, tail_bound_report, truncation_equivariance_check,
};
use crate::distributions::{ContinuousFamily, DiscreteDistribution};
use crate::error::{param, Result};
use crate::exact::{brute_force_optimum, monte_carlo, NumberMode, Objective};
use crate::generators::{
    gen_densest_subgraph_instance, gen_independent_set_instance, gen_mhr_instance, gen_random_discrete,
    gen_random_rational, random_mhr_family, CertificateCheck, DksBase, Graph,
};
use crate::ptas::{ptas_select, PtasConfig};
use crate::rng::SeededRng;
use crate::scalar::ratio_to_f64;
use crate::selectors::{select_greedy, select_quantile};

/// One checked inequality `lhs <= rhs` on the instance built from `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub suite: String,
    pub inequality: String,
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    pub holds: bool,
    pub note: Option<String>,
}

impl CheckOutcome {
    fn float(suite: &str, inequality: &str, seed: u64, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self {
            suite: suite.into(),
            inequality: inequality.into(),
            seed,
            lhs,
            rhs,
            margin: rhs - lhs,
            holds: lhs <= rhs + tol,
            note: None,
        }
    }

    fn exact(suite: &str, inequality: &str, seed: u64, lhs: &BigRational, rhs: &BigRational) -> Self {
        let (l, r) = (ratio_to_f64(lhs), ratio_to_f64(rhs));
        Self {
            suite: suite.into(),
            inequality: inequality.into(),
            seed,
            lhs: l,
            rhs: r,
            margin: r - l,
            holds: lhs <= rhs,
            note: None,
        }
    }

    fn failed(suite: &str, seed: u64, err: &crate::Error) -> Self {
        Self {
            suite: suite.into(),
            inequality: "suite ran".into(),
            seed,
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            holds: false,
            note: Some(err.to_string()),
        }
    }
}

/// A named family of checks, each run with one seed at a time.
#[derive(Clone, Copy)]
pub struct Suite {
    pub name: &'static str,
    pub run: fn(u64) -> Result<Vec<CheckOutcome>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn violations(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.holds)
    }

    pub fn passed(&self) -> bool {
        self.violations().next().is_none()
    }
}

/// Runs `suites` on every seed; errors inside a suite become failed checks.
pub fn run_verify_suites(suites: &[Suite], seeds: impl IntoIterator<Item = u64> + Clone) -> VerifyReport {
    let mut report = VerifyReport::default();
    for suite in suites {
        for seed in seeds.clone() {
            match (suite.run)(seed) {
                Ok(checks) => report.checks.extend(checks),
                Err(e) => report.checks.push(CheckOutcome::failed(suite.name, seed, &e)),
            }
        }
    }
    report
}

/// Runs the configured suites (all when `suites` is absent) on seeds
/// `seed..seed + trials`.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    if cfg.trials == 0 {
        return param("trials must be >= 1");
    }
    let all = default_suites();
    let chosen: Vec<Suite> = match &cfg.suites {
        None => all,
        Some(names) => names
            .iter()
            .map(|name| {
                all.iter().find(|s| s.name == name).copied().ok_or_else(|| {
                    let known = all.iter().map(|s| s.name).join(", ");
                    crate::Error::InvalidParameter(format!("unknown suite {name:?} (known: {known})"))
                })
            })
            .collect::<Result<_>>()?,
    };
    Ok(run_verify_suites(&chosen, cfg.seed..cfg.seed + cfg.trials as u64))
}

pub fn default_suites() -> Vec<Suite> {
    vec![
        Suite {
            name: "greedy-guarantee",
            run: greedy_guarantee,
        },
        Suite {
            name: "ptas-vs-oracle",
            run: ptas_vs_oracle,
        },
        Suite {
            name: "quantile-constants",
            run: quantile_constants,
        },
        Suite {
            name: "top-quantile",
            run: top_quantile,
        },
        Suite {
            name: "anchoring-probability",
            run: anchoring_probability,
        },
        Suite {
            name: "truncation-equivariance",
            run: truncation_equivariance,
        },
        Suite {
            name: "mhr-quantiles",
            run: mhr_quantiles,
        },
        Suite {
            name: "tail-bounds",
            run: tail_bounds,
        },
        Suite {
            name: "is-reduction",
            run: is_reduction,
        },
        Suite {
            name: "dks-reduction",
            run: dks_reduction,
        },
        Suite {
            name: "oracle-monte-carlo",
            run: oracle_monte_carlo,
        },
    ]
}

fn size(rng: &mut SeededRng, n_lo: u64, n_hi: u64, k_lo: u64, k_hi: u64) -> (usize, usize) {
    let n = rng.int_in(n_lo, n_hi);
    let k = rng.int_in(k_lo, k_hi.min(n));
    (n as usize, k as usize)
}

const E_FACTOR: f64 = 1.0 - 1.0 / std::f64::consts::E;

fn greedy_guarantee(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = SeededRng::new(seed);
    let (n, k) = size(&mut rng, 3, 10, 1, 4);
    let inst = gen_random_discrete(n, k, 5, &mut rng)?;
    let (_, opt) = brute_force_optimum(&inst, Objective::Max, NumberMode::Float64)?;
    let got = select_greedy(&inst, Objective::Max)?.value_max;
    Ok(vec![CheckOutcome::float(
        "greedy-guarantee",
        "(1-1/e) OPT <= greedy",
        seed,
        E_FACTOR * opt.to_f64(),
        got,
        1e-9,
    )])
}

fn ptas_vs_oracle(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = SeededRng::new(seed);
    let (n, k) = size(&mut rng, 4, 10, 2, 4);
    let inst = gen_random_discrete(n, k, 4, &mut rng)?;
    let opt = brute_force_optimum(&inst, Objective::Max, NumberMode::Float64)?.1.to_f64();
    let eps = 0.05;
    let got = ptas_select(&inst, &PtasConfig::new(eps))?.result.value_max;
    Ok(vec![
        CheckOutcome::float("ptas-vs-oracle", "ptas <= OPT", seed, got, opt, 1e-9),
        CheckOutcome::float("ptas-vs-oracle", "(1 - 10 eps) OPT <= ptas, eps = 0.05", seed, (1.0 - 10.0 * eps) * opt, got, 1e-9),
    ])
}

fn quantile_constants(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = SeededRng::new(seed);
    let k = if rng.bernoulli(0.5) { 4 } else { 9 };
    let n = rng.int_in(k as u64, 11) as usize;
    let (inst, _) = gen_mhr_instance(n, k, 0.1, &mut rng)?;
    let sel = select_quantile(&inst, (k as f64).sqrt())?;
    let opt_max = brute_force_optimum(&inst, Objective::Max, NumberMode::Float64)?.1.to_f64();
    let opt_smax = brute_force_optimum(&inst, Objective::SecondMax, NumberMode::Float64)?.1.to_f64();
    Ok(vec![
        CheckOutcome::float("quantile-constants", "OPT_max / 32 <= quantile", seed, opt_max / 32.0, sel.value_max, 1e-12),
        CheckOutcome::float(
            "quantile-constants",
            "OPT_smax / 1000 <= quantile",
            seed,
            opt_smax / 1000.0,
            sel.value(Objective::SecondMax),
            1e-12,
        ),
    ])
}

fn top_quantile(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = SeededRng::new(seed);
    let (n, k) = size(&mut rng, 2, 7, 2, 4);
    let inst = gen_random_rational(n, k, 4, 20, &mut rng)?;
    // p = a/b in [1, 4].
    let b = rng.int_in(1, 6);
    let a = rng.int_in(b, 4 * b);
    let p = BigRational::new(a.into(), b.into());
    let rep = top_quantile_check(inst.exact_variables().expect("exact"), k, &p)?;
    Ok(vec![
        CheckOutcome::exact(
            "top-quantile",
            "(1-(1-1/p)^k) OPT_max <= E[max_S]",
            seed,
            &(&rep.factor_max * &rep.opt_max),
            &rep.value_max,
        ),
        CheckOutcome::exact(
            "top-quantile",
            "(1-(k+1)(1-1/p)^(k-1)) OPT_smax <= E[smax_S]",
            seed,
            &(&rep.factor_smax * &rep.opt_smax),
            &rep.value_smax,
        ),
    ])
}

fn two_point_vars(rng: &mut SeededRng) -> Result<Vec<DiscreteDistribution>> {
    let n = rng.int_in(1, 16) as usize;
    (0..n)
        .map(|_| {
            let q = rng.uniform(0.01, 1.0);
            DiscreteDistribution::new([(rng.uniform(0.0, 3.0), 1.0 - q), (rng.uniform(3.0, 100.0), q)])
        })
        .collect()
}

fn anchoring_probability(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = SeededRng::new(seed);
    let vars = two_point_vars(&mut rng)?;
    let trace = compute_beta(&vars)?;
    let pb = probability_lower_bound_check(&vars, &trace)?;
    Ok(vec![
        CheckOutcome::exact(
            "anchoring-probability",
            "1/2 <= Pr[max >= beta]",
            seed,
            &BigRational::new(1.into(), 2.into()),
            &pb.p_max,
        ),
        CheckOutcome::exact(
            "anchoring-probability",
            "0.098 <= Pr[smax >= beta1]",
            seed,
            &BigRational::new(98.into(), 1000.into()),
            &pb.p_smax,
        ),
    ])
}

fn truncation_equivariance(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = SeededRng::new(seed);
    let vars = if rng.bernoulli(0.5) {
        two_point_vars(&mut rng)?
    } else {
        let n = rng.int_in(2, 12) as usize;
        gen_random_discrete(n, 1, 6, &mut rng)?.variables().to_vec()
    };
    let trace = compute_beta(&vars)?;
    let same = truncation_equivariance_check(&vars, &trace)?;
    let mut c = CheckOutcome::float("truncation-equivariance", "trace on X equals trace on X-hat", seed, 0.0, 0.0, 0.0);
    c.holds = same;
    Ok(vec![c])
}

fn mhr_quantiles(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = SeededRng::new(seed);
    let family = loop {
        let f = random_mhr_family(&mut rng);
        if !matches!(f, ContinuousFamily::Normal { .. }) {
            break f;
        }
    };
    let p = 10f64.powf(rng.uniform(0.0, 4.0));
    let d = rng.uniform(1.0, 20.0);
    let scaling = mhr_alpha_scaling(&family, p, d)?;
    let mut out = vec![CheckOutcome::float(
        "mhr-quantiles",
        "alpha_{p^d} <= d alpha_p",
        seed,
        scaling.lhs,
        scaling.rhs,
        1e-9,
    )];
    let p2 = p.max(2.0);
    let tail = mhr_tail_bound(&family, p2)?;
    out.push(CheckOutcome::float("mhr-quantiles", "Con[X >= alpha_p] <= 6 alpha_p / p", seed, tail.lhs, tail.rhs, 1e-9));
    Ok(out)
}

fn tail_bounds(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = SeededRng::new(seed);
    let vars: Vec<ContinuousFamily> = (0..8)
        .map(|_| ContinuousFamily::exponential(rng.uniform(0.5, 3.0)))
        .collect::<Result<_>>()?;
    let trace = compute_beta_continuous(&vars)?;
    let mut out = Vec::new();
    for eps in [1.0 / 32.0, 1.0 / 64.0, 1.0 / 256.0] {
        let rep = tail_bound_report(&vars, &trace, eps, 200, &mut rng)?;
        for (name, c) in [
            ("sum of non-survivor tails <= 8 sqrt(eps) d beta1", rep.sum_of_tails),
            ("survivor tail <= 6 sqrt(eps) d beta2", rep.last_variable),
            ("max surrogate <= 14 sqrt(eps) d beta", rep.max_surrogate),
            ("smax surrogate <= 8 sqrt(eps) d beta1", rep.smax_surrogate),
        ] {
            out.push(CheckOutcome::float("tail-bounds", &format!("{name}, eps = {eps}"), seed, c.lhs, c.rhs, 1e-12));
        }
    }
    Ok(out)
}

fn certificate_outcomes(suite: &str, seed: u64, checks: Vec<CertificateCheck>) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    for c in checks {
        if let Some(l) = &c.lower {
            out.push(CheckOutcome::exact(suite, &format!("bound <= value on {:?}", c.subset), seed, l, &c.value));
        }
        if let Some(u) = &c.upper {
            out.push(CheckOutcome::exact(suite, &format!("value <= bound on {:?}", c.subset), seed, &c.value, u));
        }
    }
    out
}

fn is_reduction(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = SeededRng::new(seed);
    // (n, d) with n d / 2 <= 6 edges.
    let shapes = [(2, 1), (4, 1), (6, 1), (8, 1), (10, 1), (12, 1), (3, 2), (4, 2), (5, 2), (6, 2), (4, 3)];
    let (n, d) = shapes[rng.int_in(0, shapes.len() as u64 - 1) as usize];
    let g = Graph::random_regular(n, d, &mut rng)?;
    let k = rng.int_in(1, 3.min(n as u64)) as usize;
    let red = gen_independent_set_instance(&g, k)?;
    let checks = (0..n).combinations(k).map(|s| red.check(&s)).collect::<Result<Vec<_>>>()?;
    Ok(certificate_outcomes("is-reduction", seed, checks))
}

fn dks_reduction(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = SeededRng::new(seed);
    let n = rng.int_in(3, 6) as usize;
    let g = Graph::random_gnp(n, rng.uniform(0.0, 1.0), &mut rng)?;
    let k = rng.int_in(2, 3) as usize;
    let red = gen_densest_subgraph_instance(&g, k, DksBase::Safe)?;
    let checks = (0..n).combinations(k).map(|s| red.check(&s)).collect::<Result<Vec<_>>>()?;
    Ok(certificate_outcomes("dks-reduction", seed, checks))
}

fn oracle_monte_carlo(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = SeededRng::new(seed);
    let (n, k) = size(&mut rng, 2, 8, 2, 8);
    let inst = gen_random_discrete(n, k, 5, &mut rng)?;
    let subset: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    for obj in [Objective::Max, Objective::SecondMax] {
        let exact = inst.evaluate(&subset, obj)?;
        let (est, se) = monte_carlo(&inst, &subset, obj, 4000, &mut rng)?;
        out.push(CheckOutcome::float(
            "oracle-monte-carlo",
            &format!("|exact - MC| <= 5 stderr ({})", obj.name()),
            seed,
            (exact - est).abs(),
            5.0 * se,
            1e-9,
        ));
    }
    Ok(out)
}
