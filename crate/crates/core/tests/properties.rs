mod common;

use num_rational::BigRational;
use proptest::prelude::*;

use common::{enumerate_order_stats, IntVar};
use kselect::anchoring::compute_beta;
use kselect::exact::{expected_max, expected_smax};
use kselect::selectors::{select_by_score, select_greedy, SelectorSpec};
use kselect::{ContinuousFamily, DiscreteDistribution, Instance, Objective};

fn dist() -> impl Strategy<Value = DiscreteDistribution> {
    prop::collection::vec((0.0f64..100.0, 0.01f64..1.0), 1..6).prop_map(|atoms| {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        DiscreteDistribution::new(atoms.into_iter().map(|(v, w)| (v, w / total))).unwrap()
    })
}

fn int_var() -> impl Strategy<Value = IntVar> {
    prop::collection::vec((0u64..50, 1u64..9), 1..5).prop_map(|atoms| IntVar {
        values: atoms.iter().map(|a| a.0).collect(),
        weights: atoms.iter().map(|a| a.1).collect(),
    })
}

fn mass(x: &DiscreteDistribution) -> f64 {
    x.probs().iter().sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn truncation_keeps_mass_and_lowers_values(x in dist(), p in 1.0f64..50.0) {
        let t = x.truncate_at_quantile(&p).unwrap();
        prop_assert!((mass(&t) - 1.0).abs() < 1e-9);
        prop_assert!(t.max_value() <= x.max_value());
        prop_assert!(t.mean() <= x.mean() + 1e-9);
        // Everything at or above alpha_p collapses onto it.
        let alpha = x.quantile_alpha(&p).unwrap();
        prop_assert_eq!(*t.max_value(), alpha);
        prop_assert!(t.prob_ge(&alpha) >= 1.0 / p - 1e-12);
    }

    #[test]
    fn alpha_tail_at_least_one_over_p(x in dist(), p in 1.0f64..1000.0) {
        let a = x.quantile_alpha(&p).unwrap();
        prop_assert!(x.prob_ge(&a) >= 1.0 / p - 1e-12);
        // Nothing larger has that much tail.
        if let Some(next) = x.values().iter().find(|&&v| v > a) {
            prop_assert!(x.prob_ge(next) < 1.0 / p + 1e-12);
        }
    }

    #[test]
    fn exact_sweep_matches_enumeration(vars in prop::collection::vec(int_var(), 1..5)) {
        let (want_max, want_smax) = enumerate_order_stats(&vars);
        let rat: Vec<_> = vars.iter().map(IntVar::to_rational).collect();
        let refs: Vec<_> = rat.iter().collect();
        prop_assert_eq!(expected_max(&refs), want_max);
        if vars.len() >= 2 {
            prop_assert_eq!(expected_smax(&refs).unwrap(), want_smax);
        }
    }

    #[test]
    fn smax_below_max_and_max_monotone(vars in prop::collection::vec(dist(), 2..7)) {
        let refs: Vec<_> = vars.iter().collect();
        let m = expected_max(&refs);
        prop_assert!(expected_smax(&refs).unwrap() <= m + 1e-9);
        prop_assert!(expected_max(&refs[..refs.len() - 1]) <= m + 1e-9);
    }

    #[test]
    fn score_selectors_scale_covariant(vars in prop::collection::vec(dist(), 4..9), c in 0.1f64..20.0) {
        let k = 3;
        let inst = Instance::new(vars.clone(), k).unwrap();
        let scaled = Instance::new(vars.iter().map(|x| x.scaled(&c)).collect(), k).unwrap();
        for spec in [SelectorSpec::quantile_default(k), SelectorSpec::top_quantile_default(k), SelectorSpec::best_of_default(k)] {
            let a = select_by_score(&inst, &spec).unwrap();
            let b = select_by_score(&scaled, &spec).unwrap();
            let (sa, sb) = (a.scores.unwrap(), b.scores.unwrap());
            for (x, y) in sa.iter().zip(&sb) {
                prop_assert!((x * c - y).abs() <= 1e-9 * (1.0 + y.abs()));
            }
            prop_assert!((a.value_max * c - b.value_max).abs() <= 1e-9 * (1.0 + b.value_max));
        }
        let g = select_greedy(&inst, Objective::Max).unwrap();
        let h = select_greedy(&scaled, Objective::Max).unwrap();
        prop_assert!((g.value_max * c - h.value_max).abs() <= 1e-9 * (1.0 + h.value_max));
    }

    #[test]
    fn elimination_rounds_are_monotone_in_quantile(vars in prop::collection::vec(dist(), 1..17)) {
        let t = compute_beta(&vars).unwrap();
        // Survivors of a round beat everyone eliminated in it at that round's quantile.
        for round in &t.rounds {
            let alpha = |i: usize| if i < vars.len() { vars[i].quantile_alpha(&round.q).unwrap() } else { 0.0 };
            let worst_kept = round.survivors.iter().map(|&i| alpha(i)).fold(f64::INFINITY, f64::min);
            let best_gone = round
                .order
                .iter()
                .filter(|i| !round.survivors.contains(i))
                .map(|&i| alpha(i))
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(worst_kept >= best_gone);
            prop_assert_eq!(round.beta, best_gone);
        }
        prop_assert!(t.beta() >= t.beta1 && t.beta() >= t.beta2);
        // Multiplying every variable by c multiplies the thresholds by c.
        let c = 3.0;
        let s = compute_beta(&vars.iter().map(|x| x.scaled(&c)).collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(s.survivor, t.survivor);
        prop_assert!((s.beta1 - c * t.beta1).abs() <= 1e-9 * (1.0 + s.beta1));
    }

    #[test]
    fn discretized_mean_is_bracketed(rate in 0.1f64..5.0, a in 0.0f64..5.0, w in 0.5f64..10.0, cells in 10usize..2000) {
        for f in [ContinuousFamily::exponential(rate).unwrap(), ContinuousFamily::uniform(a, a + w).unwrap()] {
            let clip = f.quantile_alpha(1e4).unwrap();
            let grid = clip / cells as f64;
            let x = f.discretize(grid, clip).unwrap();
            prop_assert!((mass(&x) - 1.0).abs() < 1e-9);
            // Values are rounded down to the grid and capped at the clip.
            let capped = f.mean() - f.tail_contribution(clip) + clip * f.survival(clip);
            prop_assert!(x.mean() <= capped + 1e-9);
            prop_assert!(x.mean() >= capped - grid - 1e-9);
        }
    }
}

#[test]
fn rational_and_float_paths_agree_on_a_fixed_case() {
    let x = IntVar { values: vec![0, 3, 7], weights: vec![2, 1, 1] };
    let y = IntVar { values: vec![5], weights: vec![1] };
    let (m, s) = enumerate_order_stats(&[x.clone(), y.clone()]);
    // max(X, 5): 5 w.p. 3/4, 7 w.p. 1/4; smax: 0 w.p. 1/2, 3 w.p. 1/4, 5 w.p. 1/4.
    assert_eq!(m, BigRational::new(11.into(), 2.into()));
    assert_eq!(s, BigRational::new(2.into(), 1.into()));
    let (fx, fy) = (x.to_float(), y.to_float());
    assert!((expected_max(&[&fx, &fy]) - 5.5).abs() < 1e-12);
}
