mod common;

use proptest::prelude::*;

use rap_core::enumeration::{forward_bat, prefix_restrict, upper_bound_bat};
use rap_core::model::{
    format_configs, parse_solution_string, space_size_component_based, space_size_number_based,
    subsystem_aggregates, system_aggregates, Aggregates, ComponentOption, CountVector, RapInstance, SubsystemSpec,
};
use rap_core::oracle::{brute_force_solve, random_instance, InstanceLimits};
use rap_core::pruning::{dominance_filter, pareto_indices, pareto_indices_reference};
use rap_core::solver::{solve, SolverOptions};

fn option() -> impl Strategy<Value = ComponentOption> {
    (1u32..=99, 1u64..=9, 1u64..=9).prop_map(|(r, c, w)| ComponentOption::new(f64::from(r) / 100.0, c, w).unwrap())
}

fn spec() -> impl Strategy<Value = SubsystemSpec> {
    (prop::collection::vec(option(), 1..=4), 1u32..=8)
        .prop_flat_map(|(opts, max)| (Just(opts), 1..=max, Just(max)))
        .prop_map(|(opts, min, max)| SubsystemSpec::new(opts, min, max).unwrap())
}

fn counts_for(spec: &SubsystemSpec) -> impl Strategy<Value = CountVector> {
    prop::collection::vec(0u32..=9, spec.arity()).prop_map(CountVector)
}

fn triples(max_len: usize) -> impl Strategy<Value = Vec<Aggregates>> {
    prop::collection::vec(
        (0u64..20, 0u64..20, 1u32..30).prop_map(|(w, c, k)| Aggregates {
            reliability: 0.7 + f64::from(k) / 100.0,
            weight: w,
            cost: c,
        }),
        1..=max_len,
    )
}

fn key(a: &Aggregates) -> (u64, u64, u64) {
    (a.weight, a.cost, a.reliability.to_bits())
}

proptest! {
    #[test]
    fn adding_a_component_never_lowers_reliability(
        (s, x, j) in spec().prop_flat_map(|s| { let n = s.arity(); (Just(s.clone()), counts_for(&s), 0..n) })
    ) {
        let before = subsystem_aggregates(&x, &s).unwrap();
        let mut y = x.clone();
        y.0[j] += 1;
        let after = subsystem_aggregates(&y, &s).unwrap();
        prop_assert!(after.reliability >= before.reliability);
        prop_assert_eq!(after.weight, before.weight + s.options[j].weight);
        prop_assert_eq!(after.cost, before.cost + s.options[j].cost);
        prop_assert!((0.0..=1.0).contains(&after.reliability));
    }

    #[test]
    fn system_aggregates_are_a_series_fold(specs in prop::collection::vec(spec(), 1..=5), seed in any::<u64>()) {
        let inst = RapInstance::new(specs, 1000, 1000, None).unwrap();
        let configs: Vec<CountVector> = inst.subsystems.iter().enumerate()
            .map(|(i, s)| CountVector((0..s.arity()).map(|j| ((seed >> ((i * 4 + j) % 60)) & 3) as u32).collect()))
            .collect();
        let total = system_aggregates(&configs, &inst).unwrap();
        let parts: Vec<Aggregates> = configs.iter().zip(&inst.subsystems).map(|(x, s)| subsystem_aggregates(x, s).unwrap()).collect();
        let folded = parts.iter().fold(Aggregates::IDENTITY, |a, &b| a.series(b));
        prop_assert_eq!(total, folded);
        prop_assert_eq!(total.weight, parts.iter().map(|p| p.weight).sum::<u64>());
        let product: f64 = parts.iter().map(|p| p.reliability).product();
        prop_assert!((total.reliability - product).abs() <= 1e-15);
    }

    #[test]
    fn solution_strings_round_trip(specs in prop::collection::vec(spec(), 1..=6), seed in any::<u64>()) {
        let inst = RapInstance::new(specs, 1000, 1000, None).unwrap();
        let configs: Vec<CountVector> = inst.subsystems.iter().enumerate()
            .map(|(i, s)| CountVector((0..s.arity()).map(|j| ((seed >> ((i * 3 + j) % 60)) % 10) as u32).collect()))
            .collect();
        let text = format_configs(&configs).unwrap();
        let parsed = parse_solution_string(&text, &inst).unwrap();
        prop_assert_eq!(&parsed.configs, &configs);
        prop_assert_eq!(format_configs(&parsed.configs).unwrap(), text);
    }

    #[test]
    fn number_based_space_is_no_larger(specs in prop::collection::vec(spec(), 1..=6)) {
        let inst = RapInstance::new(specs, 1, 1, None).unwrap();
        prop_assert!(space_size_number_based(&inst).0 <= space_size_component_based(&inst).0);
    }

    #[test]
    fn upper_bound_count_law(mu in 1usize..=5, u in 2u32..=9) {
        let order = upper_bound_bat(mu, u).unwrap();
        let expected = (1..=mu as u64).fold(1u64, |acc, i| acc * (u64::from(u) - 1 + i) / i);
        prop_assert_eq!(order.len() as u64, expected);
        prop_assert!(order.vectors.iter().all(|v| v.iter().sum::<u32>() < u));
        let mut sorted = order.vectors.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), order.len());
    }

    #[test]
    fn prefix_law(mu in 1usize..=5, u in 2u32..=9, j in 1usize..=5) {
        let j = j.min(mu);
        let order = upper_bound_bat(mu, u).unwrap();
        prop_assert_eq!(prefix_restrict(&order, j).unwrap().vectors, upper_bound_bat(j, u).unwrap().vectors);
        let binary = forward_bat(mu).unwrap();
        prop_assert_eq!(prefix_restrict(&binary, j).unwrap().vectors, forward_bat(j).unwrap().vectors);
    }

    #[test]
    fn dominance_matches_reference(items in triples(300)) {
        let once = dominance_filter(&items);
        prop_assert_eq!(dominance_filter(&once), once);
        prop_assert_eq!(pareto_indices(&items), pareto_indices_reference(&items));
    }

    #[test]
    fn filtering_commutes_with_concatenation(a in triples(40), b in triples(40)) {
        let product = |x: &[Aggregates], y: &[Aggregates]| -> Vec<Aggregates> {
            x.iter().flat_map(|p| y.iter().map(move |q| p.series(*q))).collect()
        };
        let mut direct: Vec<_> = dominance_filter(&product(&a, &b)).iter().map(key).collect();
        let mut staged: Vec<_> = dominance_filter(&product(&dominance_filter(&a), &dominance_filter(&b))).iter().map(key).collect();
        direct.sort();
        direct.dedup();
        staged.sort();
        staged.dedup();
        prop_assert_eq!(direct, staged);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn options_do_not_change_the_optimum(seed in any::<u64>()) {
        let inst = random_instance(seed, InstanceLimits::default());
        let reports: Vec<_> = SolverOptions::all_combinations().iter().map(|o| solve(&inst, o).unwrap()).collect();
        let r0 = reports[0].optimal_aggregates.map(|a| a.reliability.to_bits());
        for r in &reports {
            prop_assert_eq!(r.optimal_aggregates.map(|a| a.reliability.to_bits()), r0);
        }
    }

    #[test]
    fn solve_is_deterministic(seed in any::<u64>()) {
        let inst = random_instance(seed, InstanceLimits::default());
        let a = solve(&inst, &SolverOptions::default()).unwrap();
        let b = solve(&inst, &SolverOptions::default()).unwrap();
        prop_assert_eq!(&a.optimum, &b.optimum);
        prop_assert_eq!(&a.stage_stats, &b.stage_stats);
        prop_assert_eq!(a.outcome, b.outcome);
    }

    #[test]
    fn looser_weight_ceiling_never_hurts(seed in any::<u64>(), extra in 1u64..20) {
        let inst = random_instance(seed, InstanceLimits::default());
        let looser = inst.clone().with_weight_ceiling(inst.weight_ceiling + extra);
        let a = solve(&inst, &SolverOptions::default()).unwrap().optimal_aggregates;
        let b = solve(&looser, &SolverOptions::default()).unwrap().optimal_aggregates;
        if let Some(a) = a {
            prop_assert!(b.unwrap().reliability >= a.reliability);
        }
    }

    #[test]
    fn stage_counts_shrink_through_each_filter(seed in any::<u64>()) {
        let inst = random_instance(seed, InstanceLimits::default());
        let report = solve(&inst, &SolverOptions::default()).unwrap();
        prop_assert_eq!(report.stage_stats.len(), inst.len());
        for s in &report.stage_stats {
            prop_assert!(s.after_dominance <= s.after_bounds && s.after_bounds <= s.generated);
        }
    }
}

#[test]
fn oracle_agreement_over_seeds() {
    for seed in 100..200u64 {
        let inst = random_instance(seed, InstanceLimits::default());
        let oracle = brute_force_solve(&inst).unwrap();
        for options in SolverOptions::all_combinations() {
            let report = solve(&inst, &options).unwrap();
            assert_eq!(
                report.optimal_aggregates.map(|a| a.reliability.to_bits()),
                oracle.optimal_aggregates.map(|a| a.reliability.to_bits()),
                "seed {seed} {options:?}"
            );
        }
    }
}

#[test]
fn lower_bound_at_the_optimum_keeps_it() {
    for seed in 0..100u64 {
        let inst = random_instance(seed, InstanceLimits::default());
        let Some(best) = brute_force_solve(&inst).unwrap().optimal_aggregates else { continue };
        let bounded = inst.with_reliability_lb(Some(best.reliability));
        let got = solve(&bounded, &SolverOptions::default()).unwrap().optimal_aggregates.unwrap();
        assert_eq!(got.reliability.to_bits(), best.reliability.to_bits(), "seed {seed}");
    }
}

#[test]
fn generator_yields_enough_feasible_instances() {
    let feasible = (0..100u64)
        .filter(|&s| brute_force_solve(&random_instance(s, InstanceLimits::default())).unwrap().optimum.is_some())
        .count();
    assert!(feasible >= 30, "only {feasible} of 100 feasible");
    assert!(feasible < 100, "every instance feasible; ceilings never bind");
}

#[test]
fn admission_rejections_are_exhaustively_sound() {
    use rap_core::pruning::{admit_partial, compute_suffix_bounds};
    let limits = InstanceLimits { min_subsystems: 2, max_subsystems: 3, max_options: 2, max_total: 3 };
    for seed in 0..40u64 {
        let inst = random_instance(seed, limits);
        let t = common::tables(&inst);
        let bounds = compute_suffix_bounds(&t).unwrap();
        let n = t.len();
        for k in 1..n {
            common::for_each_combination(&t[..k], |_, agg| {
                if admit_partial(&agg, k, &bounds, &inst) {
                    return;
                }
                common::for_each_combination(&t[k..], |suffix, _| {
                    let full = suffix.iter().enumerate().fold(agg, |a, (i, &j)| a.series(t[k + i].entries[j].aggregates));
                    assert!(!common::feasible(&full, &inst), "seed {seed}: rejected prefix completes");
                });
            });
        }
    }
}
