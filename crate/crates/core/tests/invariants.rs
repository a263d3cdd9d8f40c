use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use resilience_core::format;
use resilience_core::game::{cla, frag, res_k_set, safe_k_set};
use resilience_core::random::{random_system, RandomSystemParams};
use resilience_core::{EdgeKind, Mode, Move, StateId, StateSet, TransitionSystem, ValidationOptions};

fn system(seed: u64, states: usize, dense: bool, repair: bool) -> TransitionSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_system(
        &mut rng,
        RandomSystemParams {
            states,
            errors: 1,
            density: if dense { 0.4 } else { 0.2 },
            repair,
        },
    )
}

fn subset(sys: &TransitionSystem, mask: u32) -> StateSet {
    StateSet::from_states(
        sys.num_states(),
        sys.states().filter(|s| mask & (1 << s.0) != 0),
    )
}

fn arb_system() -> impl Strategy<Value = TransitionSystem> {
    (any::<u64>(), 2usize..=10, any::<bool>(), any::<bool>()).prop_map(|(seed, n, d, r)| system(seed, n, d, r))
}

fn arb_mode() -> impl Strategy<Value = Mode> {
    prop_oneof![Just(Mode::Base), Just(Mode::Repair)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn safe_k_is_monotone_in_goal(sys in arb_system(), a in any::<u32>(), b in any::<u32>(), k in 0u32..4, mode in arb_mode()) {
        let g = subset(&sys, a & b);
        let g2 = subset(&sys, a);
        prop_assert!(safe_k_set(&sys, &g, k, mode).is_subset(&safe_k_set(&sys, &g2, k, mode)));
    }

    #[test]
    fn safe_k_is_antitone_in_k(sys in arb_system(), a in any::<u32>(), k in 0u32..4, mode in arb_mode()) {
        let g = subset(&sys, a);
        prop_assert!(safe_k_set(&sys, &g, k + 1, mode).is_subset(&safe_k_set(&sys, &g, k, mode)));
    }

    #[test]
    fn contraction_and_fixed_point(sys in arb_system(), a in any::<u32>(), k in 0u32..4, mode in arb_mode()) {
        let g = subset(&sys, a);
        prop_assert!(safe_k_set(&sys, &g, k, mode).is_subset(&g));
        let (r, _) = res_k_set(&sys, k, mode, Some(&g));
        prop_assert!(r.is_subset(&g));
        prop_assert_eq!(safe_k_set(&sys, &r, k, mode), r.clone());
        let (r1, _) = res_k_set(&sys, k + 1, mode, Some(&g));
        prop_assert!(r1.is_subset(&r));
    }

    #[test]
    fn frag_is_monotone(sys in arb_system(), a in any::<u32>(), b in any::<u32>()) {
        let small = subset(&sys, a & b);
        let big = subset(&sys, a);
        prop_assert!(frag(&sys, &small).is_subset(&frag(&sys, &big)));
    }

    #[test]
    fn cla_witnesses_descend_to_goal(sys in arb_system(), a in any::<u32>(), l in any::<u32>(), mode in arb_mode()) {
        let goal = subset(&sys, a).intersection(&sys.non_error());
        let limit = subset(&sys, l).intersection(&sys.non_error());
        let attr = cla(&sys, &limit, &goal, mode);
        prop_assert!(goal.is_subset(&attr.set));
        let allowed = limit.union(&goal);
        for s in attr.set.iter() {
            if goal.contains(s) {
                continue;
            }
            prop_assert!(limit.contains(s));
            let rank = attr.rank(s).unwrap();
            prop_assert!((rank as usize) <= sys.num_states());
            let mut next: Vec<StateId> = match attr.witness(s).unwrap() {
                Move::To(t) => {
                    prop_assert!(sys.successors(s, EdgeKind::Controlled).contains(&t));
                    vec![t]
                }
                Move::Wait => {
                    prop_assert_eq!(mode, Mode::Repair);
                    Vec::new()
                }
            };
            if mode == Mode::Repair {
                next.extend_from_slice(sys.successors(s, EdgeKind::Repair));
            }
            prop_assert!(!next.is_empty());
            for t in next {
                prop_assert!(allowed.contains(t) && attr.contains(t));
                prop_assert!(attr.rank(t).unwrap() < rank);
            }
        }
    }

    #[test]
    fn json_round_trip(sys in arb_system()) {
        let text = format::to_json_string(&sys);
        prop_assert_eq!(format::from_json_str(&text, ValidationOptions::default()).unwrap(), sys);
    }

    #[test]
    fn successors_match_edge_lists(sys in arb_system()) {
        for kind in EdgeKind::ALL {
            let mut from_succ = Vec::new();
            for s in sys.states() {
                for &t in sys.successors(s, kind) {
                    from_succ.push((s, t));
                    prop_assert!(sys.predecessors(t, kind).contains(&s));
                }
            }
            prop_assert_eq!(from_succ, sys.edges(kind).collect::<Vec<_>>());
        }
    }
}
