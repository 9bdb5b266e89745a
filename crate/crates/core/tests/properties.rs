mod common;

use num::{BigRational, One};
use proptest::prelude::*;

use common::{random_plan, rng, Micro};
use rkit_core::cpp::{apply_cpp, compile, execute, goal_probability, Belief, CompileOptions};
use rkit_core::fixtures::*;
use rkit_core::grounding::{ground, prune_unreachable, resolve_plan, ResolvedPlan};
use rkit_core::inject::inject;
use rkit_core::model::{Plan, PlanStep};
use rkit_core::parser::{parse_domain, parse_plan, parse_problem, serialize_domain, serialize_plan, serialize_problem};
use rkit_core::robustness::{assess_exact, assess_sampled, is_valid, robustness_upper_bound, ExactOptions};
use rkit_core::semantics::{enumerate_completions, project};

const DOMAINS: [&str; 5] = [FIG1_DOMAIN, FIG1_WEIGHTED_DOMAIN, GRIPPER_DOMAIN, MINI_LOGISTICS_DOMAIN, TOY_DOMAIN];

fn micro(seed: u64) -> Micro {
    Micro::random(&mut rng(seed), 5, 4, 6)
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

#[test]
fn fixture_domains_are_serialization_fixed_points() {
    for text in DOMAINS {
        let d = parse_domain(text).unwrap();
        let once = serialize_domain(&d);
        let again = parse_domain(&once).unwrap();
        assert_eq!(again, d);
        assert_eq!(serialize_domain(&again), once);
    }
}

#[test]
fn fixture_problems_round_trip() {
    for (d, p) in [(FIG1_DOMAIN, FIG1_PROBLEM), (GRIPPER_DOMAIN, GRIPPER_PROBLEM), (TOY_DOMAIN, TOY_PROBLEM)] {
        let d = parse_domain(d).unwrap();
        let p = parse_problem(p, &d).unwrap();
        assert_eq!(parse_problem(&serialize_problem(&p), &d).unwrap(), p);
    }
}

/// Symbols the plan reader accepts as names.
fn symbol() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_-]{0,8}"
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn micro_domains_round_trip(seed in any::<u64>()) {
        let m = micro(seed);
        let d = parse_domain(&m.domain_text()).unwrap();
        let p = parse_problem(&m.problem_text(), &d).unwrap();
        let d2 = parse_domain(&serialize_domain(&d)).unwrap();
        prop_assert_eq!(&d2, &d);
        prop_assert_eq!(parse_problem(&serialize_problem(&p), &d2).unwrap(), p);
    }

    #[test]
    fn plans_round_trip(steps in prop::collection::vec((symbol(), prop::collection::vec(symbol(), 0..3)), 0..6)) {
        let plan = Plan::new(steps.into_iter().map(|(n, a)| PlanStep::new(n, a)).collect());
        prop_assert_eq!(parse_plan(&serialize_plan(&plan)).unwrap(), plan);
    }

    #[test]
    fn readers_never_panic_on_arbitrary_text(text in "[()a-z0-9?:;. \n-]{0,200}") {
        let d = parse_domain(&text);
        let _ = parse_plan(&text);
        let base = parse_domain(GRIPPER_DOMAIN).unwrap();
        let _ = parse_problem(&text, &base);
        if let Ok(d) = d {
            let _ = serialize_domain(&d);
        }
    }

    #[test]
    fn readers_never_panic_on_mutated_fixtures(which in 0..DOMAINS.len(), cut in any::<prop::sample::Index>(), len in 0usize..12, insert in "[()?: a-z-]{0,6}") {
        let text = DOMAINS[which];
        let at = cut.index(text.len());
        let end = (at + len).min(text.len());
        if !text.is_char_boundary(at) || !text.is_char_boundary(end) {
            return Ok(());
        }
        let mutated = format!("{}{}{}", &text[..at], insert, &text[end..]);
        if let Ok(d) = parse_domain(&mutated) {
            // anything that parses also grounds or reports an error
            if let Ok(p) = parse_problem(GRIPPER_PROBLEM, &d) {
                let _ = ground(&d, &p);
            }
        }
    }

    #[test]
    fn completion_mass_is_exactly_one(seed in any::<u64>()) {
        let m = micro(seed).ground();
        let total: BigRational = enumerate_completions(&m, 24).unwrap().map(|(_, p)| p).sum();
        prop_assert!(total.is_one());
    }

    #[test]
    fn exact_assessment_matches_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let micro = Micro::random(&mut r, 5, 4, 6);
        let plan = random_plan(&mut r, &micro, 5);
        let m = micro.ground();
        let value = assess_exact(&m, &micro.resolve(&m, &plan), ExactOptions::default()).unwrap().value.unwrap();
        prop_assert_eq!(value, micro.robustness(&plan));
    }

    #[test]
    fn bound_dominates_every_plan(seed in any::<u64>()) {
        let mut r = rng(seed);
        let micro = Micro::random(&mut r, 5, 4, 6);
        let plan = random_plan(&mut r, &micro, 6);
        let m = micro.ground();
        prop_assert!(robustness_upper_bound(&m, 24) >= micro.robustness(&plan));
    }

    #[test]
    fn pruning_keeps_the_bound(seed in any::<u64>()) {
        let m = micro(seed).ground();
        let pruned = prune_unreachable(&m);
        prop_assert!(pruned.actions.len() <= m.actions.len());
        prop_assert_eq!(robustness_upper_bound(&pruned, 24), robustness_upper_bound(&m, 24));
    }

    #[test]
    fn compiled_goal_probability_equals_robustness(seed in any::<u64>()) {
        let mut r = rng(seed);
        let micro = Micro::random(&mut r, 5, 4, 6);
        let plan = random_plan(&mut r, &micro, 5);
        let m = micro.ground();
        let cpp = compile(&m, None, CompileOptions::default()).unwrap();
        let beliefs = execute(&cpp, &micro.resolve(&m, &plan)).unwrap();
        for b in &beliefs {
            prop_assert!(b.mass().is_one());
        }
        prop_assert_eq!(goal_probability(beliefs.last().unwrap(), &cpp.goal), micro.robustness(&plan));
    }

    #[test]
    fn compiled_trajectories_follow_projection(seed in any::<u64>()) {
        let mut r = rng(seed);
        let micro = Micro::random(&mut r, 5, 4, 5);
        let plan = micro.resolve(&micro.ground(), &random_plan(&mut r, &micro, 5));
        let m = micro.ground();
        let cpp = compile(&m, None, CompileOptions::default()).unwrap();
        for (start, _) in cpp.init.iter() {
            let c = cpp.completion_of(start);
            let native = project(&m, &plan, &m.init, &c);
            let mut belief = Belief::singleton(start.clone());
            for (i, &a) in plan.steps.iter().enumerate() {
                belief = apply_cpp(&cpp.actions[a], &belief).unwrap();
                prop_assert_eq!(belief.support(), 1);
                let (s, _) = belief.iter().next().unwrap();
                prop_assert_eq!(&cpp.base_state(s), &native[i + 1]);
                prop_assert_eq!(cpp.completion_of(s), c.clone());
            }
        }
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>()) {
        let m = load(FIG1_DOMAIN, FIG1_PROBLEM).unwrap();
        let plan = resolve_plan(&parse_plan(FIG1_PLAN).unwrap(), &m).unwrap();
        let a = assess_sampled(&m, &plan, 0.05, 0.05, seed).unwrap();
        let b = assess_sampled(&m, &plan, 0.05, 0.05, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn injection_keeps_original_plans_valid(seed in any::<u64>(), count in 1usize..4, gripper in any::<bool>()) {
        let (dt, pt, plan) = if gripper {
            (GRIPPER_DOMAIN, GRIPPER_PROBLEM, GRIPPER_PLAN)
        } else {
            (TOY_DOMAIN, TOY_PROBLEM, TOY_PLAN)
        };
        let d = parse_domain(dt).unwrap();
        let p = parse_problem(pt, &d).unwrap();
        let (d2, p2) = inject(&d, &p, count, seed).unwrap();
        let m = ground(&d2, &p2).unwrap();
        let resolved: ResolvedPlan = resolve_plan(&parse_plan(plan).unwrap(), &m).unwrap();
        prop_assert!(is_valid(&m, &resolved, 24).unwrap());
    }
}
