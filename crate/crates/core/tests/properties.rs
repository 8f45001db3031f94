use proptest::prelude::*;

use hfstsp::instancegen::{format_instance, generate, parse_instance, GenSpec};
use hfstsp::oracle::exhaustive_hfstsp;
use hfstsp::split::triple_ceiling;
use hfstsp::tour::{two_opt_improve, DEFAULT_TWO_OPT_PASSES};
use hfstsp::{
    approx_eq, build_cost_model, solution_time, split_algorithm, split_lazy, validate_respects, GeneratorKind,
    Instance, Repr, TourMethod,
};

fn kind() -> impl Strategy<Value = GeneratorKind> {
    prop::sample::select(GeneratorKind::ALL.to_vec())
}

fn method() -> impl Strategy<Value = TourMethod> {
    prop::sample::select(vec![
        TourMethod::NearestNeighbor,
        TourMethod::NearestNeighborTwoOpt,
        TourMethod::MstDoubleTree,
    ])
}

fn spec(max_n: usize) -> impl Strategy<Value = GenSpec> {
    (kind(), 1..=max_n, 0.25f64..4.0, any::<u64>()).prop_map(|(kind, n, alpha, seed)| GenSpec { kind, n, alpha, seed })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn solvers_agree_and_outputs_are_consistent(spec in spec(40), method in method()) {
        let inst = generate(&spec).unwrap();
        let cm = build_cost_model(&inst);
        let h = method.build(&inst, &cm);
        let tour = h.length(&cm);
        let (full, full_stats) = split_algorithm(&h, &cm).unwrap();
        prop_assert_eq!(full_stats.triples_considered, triple_ceiling(spec.n));
        for repr in [Repr::Matrix, Repr::Lists] {
            let (lazy, stats) = split_lazy(&h, &cm, repr).unwrap();
            prop_assert!(approx_eq(lazy.total_time(), full.total_time()));
            prop_assert!(stats.triples_considered <= triple_ceiling(spec.n));
        }
        prop_assert!(approx_eq(solution_time(&full, &cm).unwrap(), full.total_time()));
        prop_assert!(validate_respects(&full, &h).is_ok());
        prop_assert!(full.total_time() <= tour * (1.0 + 1e-9));
        prop_assert!(full.total_time() > 0.0 || inst.coords().iter().all(|p| *p == inst.coords()[0]));
    }

    #[test]
    fn faster_drone_never_costs_more(spec in spec(25), bump in 0.0f64..3.0) {
        let slow = generate(&spec).unwrap();
        let fast = Instance::new(slow.coords().to_vec(), spec.alpha + bump).unwrap();
        let (cm_slow, cm_fast) = (build_cost_model(&slow), build_cost_model(&fast));
        let h = TourMethod::NearestNeighborTwoOpt.build(&slow, &cm_slow);
        let (s, _) = split_lazy(&h, &cm_slow, Repr::Lists).unwrap();
        // Same operations, faster drone.
        let same_ops = solution_time(&s, &cm_fast).unwrap();
        prop_assert!(same_ops <= s.total_time() * (1.0 + 1e-9));
        let (best_fast, _) = split_lazy(&h, &cm_fast, Repr::Lists).unwrap();
        prop_assert!(best_fast.total_time() <= same_ops * (1.0 + 1e-9));
    }

    #[test]
    fn instance_text_round_trips(spec in spec(60)) {
        let inst = generate(&spec).unwrap();
        prop_assert_eq!(parse_instance(&format_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn two_opt_never_lengthens(spec in spec(60), method in method()) {
        let inst = generate(&spec).unwrap();
        let cm = build_cost_model(&inst);
        let h = method.build(&inst, &cm);
        let improved = two_opt_improve(&h, &cm, DEFAULT_TWO_OPT_PASSES);
        prop_assert!(improved.length(&cm) <= h.length(&cm) + 1e-9);
        prop_assert_eq!(improved.order()[0], 0);
        prop_assert_eq!(*improved.order().last().unwrap(), spec.n + 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn oracle_matches_split_on_small_instances(spec in spec(10), method in method()) {
        let inst = generate(&spec).unwrap();
        let cm = build_cost_model(&inst);
        let h = method.build(&inst, &cm);
        let exact = exhaustive_hfstsp(&h, &cm).unwrap();
        let (split, _) = split_algorithm(&h, &cm).unwrap();
        prop_assert!(approx_eq(exact.total_time(), split.total_time()));
        prop_assert!(exact.total_time() <= h.length(&cm) * (1.0 + 1e-9));
    }
}
