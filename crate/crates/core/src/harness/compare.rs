use std::time::Instant;

use super::{ExperimentConfig, Method, ResultRow};
use crate::error::Result;
use crate::exact::{brute_force_optimum, monte_carlo_samplers, NumberMode, Objective};
use crate::generators::{gen_bias_instance, gen_clipped_normal_instance};
use crate::instance::Instance;
use crate::ptas::{ptas_select, PtasConfig};
use crate::rng::{derive_seed, SeededRng};
use crate::selectors::{select_by_score, select_greedy, SelectionResult, SelectorSpec};

/// How a configured method is executed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Runner {
    /// One selection, reported under every objective.
    Score(SelectorSpec),
    /// One selection per objective.
    Greedy,
    Oracle,
    /// Expected maximum only.
    Ptas(f64),
}

/// One point of a method's parameter sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MethodRun {
    pub method: Method,
    pub parameter: Option<f64>,
    pub theory_point: bool,
    pub runner: Runner,
}

// Grid plus the theory point, ascending, with the theory point flagged.
fn sweep(grid: &[f64], theory: f64) -> Vec<(f64, bool)> {
    let mut points: Vec<f64> = grid.to_vec();
    points.push(theory);
    points.sort_by(f64::total_cmp);
    points.dedup();
    points.into_iter().map(|b| (b, b == theory)).collect()
}

/// Expands methods into runs for a given `k`: `quantile` and `kr-q` sweep
/// the bottom quantiles plus their theory points (`1 - 1/sqrt(k)` and
/// `1 - 1/k`), `kr-samples` uses `r = k`.
pub fn expand_methods(methods: &[Method], k: usize, bottom_quantiles: &[f64]) -> Result<Vec<MethodRun>> {
    let mut runs = Vec::new();
    for &method in methods {
        let single = |parameter, runner| MethodRun {
            method,
            parameter,
            theory_point: true,
            runner,
        };
        match method {
            Method::Quantile => {
                for (b, theory_point) in sweep(bottom_quantiles, 1.0 - 1.0 / (k as f64).sqrt()) {
                    runs.push(MethodRun {
                        method,
                        parameter: Some(b),
                        theory_point,
                        runner: Runner::Score(SelectorSpec::quantile_from_bottom(b)?),
                    });
                }
            }
            Method::KrQuantile => {
                for (b, theory_point) in sweep(bottom_quantiles, 1.0 - 1.0 / k as f64) {
                    runs.push(MethodRun {
                        method,
                        parameter: Some(b),
                        theory_point,
                        runner: Runner::Score(SelectorSpec::top_quantile_from_bottom(b)?),
                    });
                }
            }
            Method::KrSamples => runs.push(single(Some(k as f64), Runner::Score(SelectorSpec::best_of_default(k)))),
            Method::Mean => runs.push(single(None, Runner::Score(SelectorSpec::Mean))),
            Method::Greedy => runs.push(single(None, Runner::Greedy)),
            Method::Oracle => runs.push(single(None, Runner::Oracle)),
            Method::Ptas { epsilon } => runs.push(single(Some(epsilon), Runner::Ptas(epsilon))),
        }
    }
    Ok(runs)
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Selections of one run, one entry per objective it reports: `(objective,
/// selected set, exact value on the instance, runtime)`.
fn execute(run: &MethodRun, instance: &Instance, objectives: &[Objective]) -> Result<Vec<(Objective, SelectionResult, f64)>> {
    let mut out = Vec::new();
    match run.runner {
        Runner::Score(spec) => {
            let t = Instant::now();
            let res = select_by_score(instance, &spec)?;
            let ms = elapsed_ms(t);
            for &obj in objectives {
                out.push((obj, res.clone(), ms));
            }
        }
        Runner::Greedy => {
            for &obj in objectives {
                let t = Instant::now();
                let res = select_greedy(instance, obj)?;
                out.push((obj, res, elapsed_ms(t)));
            }
        }
        Runner::Oracle => {
            for &obj in objectives {
                let t = Instant::now();
                let (subset, _) = brute_force_optimum(instance, obj, NumberMode::Float64)?;
                let ms = elapsed_ms(t);
                out.push((obj, SelectionResult::evaluated(instance, subset)?, ms));
            }
        }
        Runner::Ptas(epsilon) => {
            if objectives.contains(&Objective::Max) {
                let t = Instant::now();
                let res = ptas_select(instance, &PtasConfig::new(epsilon))?.result;
                out.push((Objective::Max, res, elapsed_ms(t)));
            }
        }
    }
    Ok(out)
}

/// Method comparison: per trial one clipped-normal instance, every method
/// run for every `k`, each row holding the expected objective of the
/// selection on the instance.
pub fn run_compare(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let mut cfg = cfg.clone();
    cfg.experiment = super::Experiment::Compare;
    cfg.validate()?;
    let k_max = *cfg.k_list.iter().max().expect("validated");
    let mut rows = Vec::new();
    for trial in 0..cfg.trials {
        let mut rng = SeededRng::new(derive_seed(cfg.seed, trial as u64));
        let base = gen_clipped_normal_instance(cfg.n, k_max, &mut rng, &cfg.instance)?;
        for &k in &cfg.k_list {
            let instance = base.with_k(k)?;
            for run in expand_methods(&cfg.methods, k, &cfg.bottom_quantiles)? {
                for (obj, res, ms) in execute(&run, &instance, &cfg.objectives)? {
                    rows.push(ResultRow {
                        experiment: "compare".into(),
                        trial,
                        method: run.method.to_string(),
                        parameter: run.parameter,
                        theory_point: run.theory_point,
                        k,
                        objective: obj.name().into(),
                        value: res.value(obj),
                        small_label_fraction: None,
                        runtime_ms: ms,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Bias study: variables see either few or many samples; each selection is
/// scored against the true normals by Monte Carlo (`score_samples` joint
/// draws of the selected variables) and the fraction of selected
/// small-sample variables is recorded.
pub fn run_bias(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let mut cfg = cfg.clone();
    cfg.experiment = super::Experiment::Bias;
    cfg.validate()?;
    let k_max = *cfg.k_list.iter().max().expect("validated");
    let mut rows = Vec::new();
    for trial in 0..cfg.trials {
        let trial_seed = derive_seed(cfg.seed, trial as u64);
        let mut rng = SeededRng::new(trial_seed);
        let bias = gen_bias_instance(cfg.n, k_max, &mut rng, &cfg.instance, cfg.small_draws, cfg.big_draws)?;
        let mut stream = 0u64;
        for &k in &cfg.k_list {
            let instance = bias.instance.with_k(k)?;
            for run in expand_methods(&cfg.methods, k, &cfg.bottom_quantiles)? {
                for (obj, res, ms) in execute(&run, &instance, &cfg.objectives)? {
                    stream += 1;
                    let mut mc_rng = SeededRng::new(derive_seed(trial_seed, stream));
                    let families: Vec<_> = res.subset.iter().map(|&i| &bias.families[i]).collect();
                    let (value, _) = monte_carlo_samplers(&families, obj, cfg.score_samples, &mut mc_rng)?;
                    let small = res.subset.iter().filter(|&&i| bias.small[i]).count();
                    rows.push(ResultRow {
                        experiment: "bias".into(),
                        trial,
                        method: run.method.to_string(),
                        parameter: run.parameter,
                        theory_point: run.theory_point,
                        k,
                        objective: obj.name().into(),
                        value,
                        small_label_fraction: Some(small as f64 / res.subset.len() as f64),
                        runtime_ms: ms,
                    });
                }
            }
        }
    }
    Ok(rows)
}
