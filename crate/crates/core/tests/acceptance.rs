//! One test per acceptance criterion. Each prints a `PASS criterion N` or
//! `FAIL criterion N` line straight to stdout (so it shows up even when the
//! harness captures output) and then asserts the criterion.

mod common;

use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use itertools::Itertools;
use num_rational::BigRational;

use common::{enumerate_order_stats, random_int_var, ratio_f64, team_value, IntVar};
use kselect::anchoring::{
    compute_beta, compute_beta_continuous, g_exact, top_quantile_check, top_quantile_max_factor, top_quantile_smax_factor,
    mhr_alpha_scaling, mhr_tail_bound, probability_lower_bound_check, tail_bound_report, truncation_equivariance_check,
};
use kselect::exact::{brute_force_optimum, expected_max, expected_smax};
use kselect::generators::{
    gen_densest_subgraph_instance, gen_independent_set_instance, gen_mhr_instance, gen_random_discrete, team_example,
    DksBase, Graph,
};
use kselect::harness::{run_compare, run_scaling, Experiment, ExperimentConfig, Method};
use kselect::ptas::{ptas_select, PtasConfig};
use kselect::selectors::{select_expectation, select_greedy, select_quantile};
use kselect::{ContinuousFamily, DiscreteDistribution, NumberMode, Objective, SeededRng};

// Tests in one binary run on parallel threads; the scaling criterion times
// code, so every criterion takes this lock.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(criterion: u32, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "{tag} criterion {criterion}: {detail}").unwrap();
    out.flush().unwrap();
    assert!(pass, "criterion {criterion}: {detail}");
}

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn criterion_01_exact_oracle() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = SeededRng::new(101);
    let (mut exact_bad, mut float_worst, mut outcomes) = (0, 0.0f64, 0u64);
    for t in 0..100 {
        let vars: Vec<IntVar> = if t == 0 {
            // Largest allowed case: 8 variables with 6 atoms each.
            (0..8)
                .map(|_| IntVar {
                    values: (0..6).map(|_| rng.int_in(0, 1000)).collect(),
                    weights: (0..6).map(|_| rng.int_in(1, 9)).collect(),
                })
                .collect()
        } else {
            let n = rng.int_in(2, 8) as usize;
            (0..n).map(|_| random_int_var(&mut rng, 6, 1000)).collect()
        };
        outcomes += vars.iter().map(|x| x.values.len() as u64).product::<u64>();
        let (want_max, want_smax) = enumerate_order_stats(&vars);
        let rat: Vec<_> = vars.iter().map(IntVar::to_rational).collect();
        let rat_refs: Vec<_> = rat.iter().collect();
        if expected_max(&rat_refs) != want_max || expected_smax(&rat_refs).unwrap() != want_smax {
            exact_bad += 1;
        }
        let flt: Vec<_> = vars.iter().map(IntVar::to_float).collect();
        let flt_refs: Vec<_> = flt.iter().collect();
        float_worst = float_worst
            .max(rel_err(expected_max(&flt_refs), ratio_f64(&want_max)))
            .max(rel_err(expected_smax(&flt_refs).unwrap(), ratio_f64(&want_smax)));
    }
    let elapsed = start.elapsed();
    report(
        1,
        exact_bad == 0 && float_worst <= 1e-9 && elapsed < Duration::from_secs(60),
        &format!(
            "100 instances, {outcomes} outcomes enumerated; exact mismatches {exact_bad}, worst float relative error {float_worst:.2e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_02_team_example() {
    let _g = serial();
    let inst = team_example();
    let risky_value = team_value(10, 0);
    let risky_set: Vec<usize> = (0..10).collect();
    // The library agrees with the closed form on every (risky, safe) split.
    let mut split_ok = true;
    let mut best: Option<(u32, BigRational)> = None;
    for risky in 0..=10u32 {
        let s: Vec<usize> = (0..risky as usize).chain(20..20 + (10 - risky as usize)).collect();
        let v = inst.evaluate_exact(&s, Objective::Max).unwrap();
        split_ok &= v == team_value(risky, 10 - risky);
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((risky, v));
        }
    }
    let (best_risky, best_value) = best.unwrap();
    let greedy = select_greedy(&inst, Objective::Max).unwrap();
    let greedy_exact = inst.evaluate_exact(&greedy.sorted_subset(), Objective::Max).unwrap();
    let ptas = ptas_select(&inst, &PtasConfig::new(0.1)).unwrap().result;
    let ptas_exact = inst.evaluate_exact(&ptas.sorted_subset(), Objective::Max).unwrap();
    let mean = select_expectation(&inst).unwrap();
    let mean_exact = inst.evaluate_exact(&mean.sorted_subset(), Objective::Max).unwrap();

    let all_risky = |s: &[usize]| s.len() == 10 && s.iter().all(|&i| i < 20);
    let pass = split_ok
        && inst.evaluate_exact(&risky_set, Objective::Max).unwrap() == risky_value
        && best_risky == 10
        && all_risky(&greedy.subset)
        && greedy_exact == risky_value
        && all_risky(&ptas.subset)
        && ptas_exact == risky_value
        && mean_exact == r(11, 10);
    let risky_count = |s: &[usize]| s.iter().filter(|&&i| i < 20).count();
    report(
        2,
        pass,
        &format!(
            "all-risky value {} = {:.5}; exhaustive optimum over splits has {best_risky} risky, value {:.5}; \
             greedy picks {} risky ({:.5}); ptas(0.1) picks {} risky ({:.5}); expectation rule value {}",
            risky_value,
            ratio_f64(&risky_value),
            ratio_f64(&best_value),
            risky_count(&greedy.subset),
            ratio_f64(&greedy_exact),
            risky_count(&ptas.subset),
            ratio_f64(&ptas_exact),
            mean_exact,
        ),
    );
}

#[test]
fn criterion_03_greedy_guarantee() {
    let _g = serial();
    let start = Instant::now();
    let factor = 1.0 - 1.0 / std::f64::consts::E;
    let mut rng = SeededRng::new(303);
    let (mut violations, mut worst) = (0, f64::INFINITY);
    for _ in 0..200 {
        let n = rng.int_in(2, 12) as usize;
        let k = rng.int_in(1, 4.min(n as u64)) as usize;
        let inst = gen_random_discrete(n, k, 6, &mut rng).unwrap();
        let opt = brute_force_optimum(&inst, Objective::Max, NumberMode::Float64).unwrap().1.to_f64();
        let got = select_greedy(&inst, Objective::Max).unwrap().value_max;
        if got < factor * opt - 1e-9 {
            violations += 1;
        }
        if opt > 0.0 {
            worst = worst.min(got / opt);
        }
    }
    let elapsed = start.elapsed();
    report(
        3,
        violations == 0 && elapsed < Duration::from_secs(120),
        &format!(
            "200 instances, {violations} violations of greedy >= (1-1/e) OPT, worst ratio {worst:.4}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_04_ptas_quality() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = SeededRng::new(404);
    let mut worst_c = [0.0f64; 2];
    let mut monotone = 0;
    let total = 200;
    for _ in 0..total {
        let n = rng.int_in(3, 14) as usize;
        let k = rng.int_in(2, 4.min(n as u64 - 1)) as usize;
        let inst = gen_random_discrete(n, k, 5, &mut rng).unwrap();
        let opt = brute_force_optimum(&inst, Objective::Max, NumberMode::Float64).unwrap().1.to_f64();
        let ratio = |eps: f64| ptas_select(&inst, &PtasConfig::new(eps)).unwrap().result.value_max / opt;
        let (r05, r10, r20) = (ratio(0.05), ratio(0.1), ratio(0.2));
        for (slot, (eps, rr)) in [(0.05, r05), (0.1, r10)].into_iter().enumerate() {
            worst_c[slot] = worst_c[slot].max((1.0 - rr) / eps);
        }
        if r05 >= r20 - 1e-12 {
            monotone += 1;
        }
    }
    let elapsed = start.elapsed();
    let frac = monotone as f64 / total as f64;
    report(
        4,
        worst_c.iter().all(|&c| c <= 10.0) && frac >= 0.9 && elapsed < Duration::from_secs(600),
        &format!(
            "measured C = {:.3} at eps 0.05 and {:.3} at eps 0.1 (limit 10); ratio(0.05) >= ratio(0.2) on {:.1}% of {total}; {:.1}s",
            worst_c[0],
            worst_c[1],
            100.0 * frac,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_05_quantile_constants() {
    let _g = serial();
    let mut rng = SeededRng::new(505);
    let (mut bad_max, mut bad_smax) = (0, 0);
    let (mut sum_max, mut sum_smax) = (0.0, 0.0);
    let (mut min_max, mut min_smax) = (f64::INFINITY, f64::INFINITY);
    for t in 0..100 {
        let k = if t % 2 == 0 { 4 } else { 9 };
        let n = rng.int_in(k as u64, 12) as usize;
        let (inst, _) = gen_mhr_instance(n, k, 0.1, &mut rng).unwrap();
        let sel = select_quantile(&inst, (k as f64).sqrt()).unwrap();
        let opt_max = brute_force_optimum(&inst, Objective::Max, NumberMode::Float64).unwrap().1.to_f64();
        let opt_smax = brute_force_optimum(&inst, Objective::SecondMax, NumberMode::Float64).unwrap().1.to_f64();
        let (vm, vs) = (sel.value_max, sel.value(Objective::SecondMax));
        bad_max += usize::from(vm < opt_max / 32.0);
        bad_smax += usize::from(vs < opt_smax / 1000.0);
        sum_max += vm / opt_max;
        sum_smax += vs / opt_smax;
        min_max = min_max.min(vm / opt_max);
        min_smax = min_smax.min(vs / opt_smax);
    }
    report(
        5,
        bad_max == 0 && bad_smax == 0,
        &format!(
            "100 MHR instances; violations max/32: {bad_max}, smax/1000: {bad_smax}; mean ratio max {:.4} (min {min_max:.4}), smax {:.4} (min {min_smax:.4})",
            sum_max / 100.0,
            sum_smax / 100.0
        ),
    );
}

#[test]
fn criterion_06_top_quantile_bound() {
    let _g = serial();
    let mut rng = SeededRng::new(606);
    let (mut bad_max, mut bad_smax) = (0, 0);
    for t in 0..100 {
        let (n, k, p) = if t == 0 {
            (6, 4, r(2, 1))
        } else {
            let n = rng.int_in(2, 8) as usize;
            let k = rng.int_in(2, n as u64) as usize;
            let b = rng.int_in(1, 8) as i64;
            let a = rng.int_in(b as u64, 4 * b as u64) as i64;
            (n, k, r(a, b))
        };
        let vars: Vec<_> = (0..n).map(|_| random_int_var(&mut rng, 5, 30).to_rational()).collect();
        let rep = top_quantile_check(&vars, k, &p).unwrap();
        bad_max += usize::from(!rep.max_holds());
        bad_smax += usize::from(!rep.smax_holds());
    }
    let root2 = std::f64::consts::SQRT_2;
    let (fm, fs) = (top_quantile_max_factor(2, root2), top_quantile_smax_factor(2, root2));
    report(
        6,
        bad_max == 0 && bad_smax == 0 && fm >= 0.91 - 1e-3 && fs >= 0.122 - 1e-3,
        &format!(
            "100 instances in exact arithmetic, violations max {bad_max}, smax {bad_smax}; k=2, p=sqrt 2 factors {fm:.5} and {fs:.5}"
        ),
    );
}

// Instances shared by criteria 7 and 8: sizes 2, 4, 8, 16 cycling, half
// two-point variables and half random atoms.
fn anchoring_instances() -> Vec<Vec<DiscreteDistribution>> {
    let mut rng = SeededRng::new(707);
    (0..500)
        .map(|t| {
            let n = [2, 4, 8, 16][t % 4];
            (0..n)
                .map(|_| {
                    if rng.bernoulli(0.5) {
                        let q = rng.uniform(0.001, 1.0);
                        let hi = 10f64.powf(rng.uniform(0.0, 4.0));
                        DiscreteDistribution::new([(rng.uniform(0.0, 1.0), 1.0 - q), (hi, q)]).unwrap()
                    } else {
                        random_int_var(&mut rng, 6, 100).to_float()
                    }
                })
                .collect()
        })
        .collect()
}

#[test]
fn criterion_07_anchoring_probabilities() {
    let _g = serial();
    let (half, bound) = (r(1, 2), r(98, 1000));
    let (mut bad_max, mut bad_smax) = (0, 0);
    let (mut min_max, mut min_smax) = (r(1, 1), r(1, 1));
    for vars in anchoring_instances() {
        let trace = compute_beta(&vars).unwrap();
        let pb = probability_lower_bound_check(&vars, &trace).unwrap();
        bad_max += usize::from(pb.p_max < half);
        bad_smax += usize::from(pb.p_smax < bound);
        min_max = min_max.min(pb.p_max);
        min_smax = min_smax.min(pb.p_smax);
    }
    let g3 = g_exact(3);
    let g3_ok = g3 == Some(r(6487, 65536));
    report(
        7,
        bad_max == 0 && bad_smax == 0 && g3_ok,
        &format!(
            "500 instances, violations Pr[max >= beta] < 1/2: {bad_max}, Pr[smax >= beta1] < 0.098: {bad_smax}; \
             smallest {:.4} and {:.4}; g(3) = {}",
            ratio_f64(&min_max),
            ratio_f64(&min_smax),
            g3.map(|g| g.to_string()).unwrap_or_default()
        ),
    );
}

#[test]
fn criterion_08_truncation_equivariance() {
    let _g = serial();
    let mut differ = 0;
    for vars in anchoring_instances() {
        let trace = compute_beta(&vars).unwrap();
        differ += usize::from(!truncation_equivariance_check(&vars, &trace).unwrap());
    }
    report(8, differ == 0, &format!("500 instances, {differ} traces changed by truncation"));
}

#[test]
fn criterion_09_mhr_quantiles() {
    let _g = serial();
    let families = [
        ContinuousFamily::exponential(1.0).unwrap(),
        ContinuousFamily::exponential(3.0).unwrap(),
        ContinuousFamily::uniform(0.0, 1.0).unwrap(),
        ContinuousFamily::uniform(2.0, 5.0).unwrap(),
    ];
    let ps: Vec<f64> = (0..=80).map(|i| 10f64.powf(i as f64 / 20.0)).collect();
    let ds: Vec<f64> = (0..=38).map(|i| 1.0 + i as f64 * 0.5).collect();
    let (mut checks, mut bad) = (0, 0);
    for f in &families {
        for &p in &ps {
            for &d in &ds {
                checks += 1;
                bad += usize::from(!mhr_alpha_scaling(f, p, d).unwrap().holds(1e-9));
            }
            if p >= 2.0 {
                checks += 1;
                bad += usize::from(!mhr_tail_bound(f, p).unwrap().holds(1e-9));
            }
        }
    }
    let mut rng = SeededRng::new(909);
    let (mut tail_checks, mut tail_bad) = (0, 0);
    let mut worst_slack = f64::INFINITY;
    for suite in 0..20 {
        let vars: Vec<ContinuousFamily> = (0..8)
            .map(|i| {
                let rate = if suite == 0 { 1.0 + i as f64 } else { rng.uniform(0.2, 5.0) };
                ContinuousFamily::exponential(rate).unwrap()
            })
            .collect();
        let trace = compute_beta_continuous(&vars).unwrap();
        for eps in [1.0 / 32.0, 1.0 / 64.0, 1.0 / 256.0] {
            let rep = tail_bound_report(&vars, &trace, eps, 200, &mut rng).unwrap();
            for c in [rep.max_surrogate, rep.smax_surrogate] {
                tail_checks += 1;
                tail_bad += usize::from(!c.holds(1e-9));
                worst_slack = worst_slack.min(c.margin() / c.rhs);
            }
        }
    }
    report(
        9,
        bad == 0 && tail_bad == 0,
        &format!(
            "{checks} quantile checks with {bad} violations; {tail_checks} tail-surrogate checks with {tail_bad} violations, smallest relative margin {worst_slack:.4}"
        ),
    );
}

#[test]
fn criterion_10_independent_set_reduction() {
    let _g = serial();
    let start = Instant::now();
    let (mut graphs, mut subsets, mut bad, mut unequal) = (0, 0u64, 0, 0);
    for m in 1..=6 {
        for g in Graph::regular_with_edges(m) {
            graphs += 1;
            let n = g.n_vertices();
            for k in [2, 3].into_iter().filter(|&k| k <= n) {
                let red = gen_independent_set_instance(&g, k).unwrap();
                let exact = red.instance.exact_variables().unwrap();
                unequal += usize::from(exact.iter().any(|x| x.mean() != red.mu));
                for s in (0..n).combinations(k) {
                    subsets += 1;
                    bad += usize::from(!red.check(&s).unwrap().holds());
                }
            }
        }
    }
    report(
        10,
        bad == 0 && unequal == 0,
        &format!(
            "{graphs} regular graphs with 1 to 6 edges, {subsets} subsets for k in 2..=3; unequal means {unequal}, certificate violations {bad}; {:.1}s",
            start.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_11_densest_subgraph_sandwich() {
    let _g = serial();
    let start = Instant::now();
    let (mut graphs, mut subsets, mut bad) = (0, 0u64, 0);
    for n in 2..=6 {
        for g in Graph::all_labelled(n).unwrap() {
            graphs += 1;
            for k in [2, 3].into_iter().filter(|&k| k <= n) {
                let red = gen_densest_subgraph_instance(&g, k, DksBase::Safe).unwrap();
                for s in (0..n).combinations(k) {
                    subsets += 1;
                    bad += usize::from(!red.check(&s).unwrap().holds());
                }
            }
        }
    }
    report(
        11,
        bad == 0,
        &format!(
            "{graphs} labelled graphs on 2 to 6 vertices, {subsets} subsets for k in 2..=3, {bad} violations; {:.1}s",
            start.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_12_method_comparison() {
    let _g = serial();
    let start = Instant::now();
    let cfg = ExperimentConfig {
        methods: vec![Method::Quantile, Method::KrQuantile, Method::Mean, Method::Greedy],
        bottom_quantiles: vec![],
        seed: 12,
        ..ExperimentConfig::for_experiment(Experiment::Compare)
    };
    assert_eq!((cfg.n, cfg.k_list.as_slice(), cfg.trials), (500, &[10, 20, 30][..], 100));
    let rows = run_compare(&cfg).unwrap();
    let mut pass = true;
    let mut lines = Vec::new();
    for &k in &cfg.k_list {
        let stats = |method: &str| {
            let xs: Vec<f64> = rows
                .iter()
                .filter(|r| r.k == k && r.method == method && r.theory_point && r.objective == "max")
                .map(|r| r.value)
                .collect();
            assert_eq!(xs.len(), cfg.trials, "{method} at k={k}");
            kselect::harness::mean_stderr(&xs)
        };
        let (q, kr, mean, greedy) = (stats("quantile"), stats("kr-q"), stats("mean"), stats("greedy"));
        let ok = kr.0 >= mean.0 && (q.0 - kr.0).abs() <= 0.02 * kr.0 && (greedy.0 - kr.0).abs() <= 0.02 * kr.0;
        pass &= ok;
        lines.push(format!(
            "k={k}: quantile {:.2}±{:.2}, kr {:.2}±{:.2}, mean {:.2}±{:.2}, greedy {:.2}±{:.2}",
            q.0, q.1, kr.0, kr.1, mean.0, mean.1, greedy.0, greedy.1
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(1800);
    report(12, pass, &format!("{}; {:.1}s", lines.join("; "), elapsed.as_secs_f64()));
}

#[test]
fn criterion_13_scaling() {
    let _g = serial();
    let cfg = ExperimentConfig {
        k_list: vec![8],
        n_list: (0..8).map(|j| 1000 << j).collect(),
        epsilon: 0.25,
        repetitions: 5,
        seed: 13,
        ..ExperimentConfig::for_experiment(Experiment::Scaling)
    };
    let rows = run_scaling(&cfg).unwrap();
    assert!(rows.last().unwrap().n >= 100_000);
    let worst = rows.iter().filter_map(|r| r.ratio_to_previous).fold(0.0, f64::max);
    let detail = rows
        .iter()
        .map(|r| format!("n={} {:.1}ms", r.n, r.runtime_ms))
        .collect::<Vec<_>>()
        .join(", ");
    report(13, worst <= 2.5, &format!("largest growth per doubling {worst:.2}; {detail}"));
}
