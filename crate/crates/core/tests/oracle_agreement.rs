use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use resilience_core::game::{res_k_set, safe_k_set};
use resilience_core::oracle::{brute_force_res_k, brute_force_safe_k, OracleLimits};
use resilience_core::random::{random_system, RandomSystemParams};
use resilience_core::{Mode, StateId, StateSet, TransitionSystem};

fn random_goal(rng: &mut ChaCha8Rng, sys: &TransitionSystem) -> StateSet {
    use rand::Rng;
    StateSet::from_states(
        sys.num_states(),
        sys.states().filter(|&s| !sys.is_error(s) && rng.gen_bool(0.7)),
    )
}

/// Returns how many (system, k) pairs had a nonempty, proper res_k and how
/// many differed between the two modes.
fn check_systems(mode: Mode, repair_edges: bool, seed: u64) -> (usize, usize) {
    let mut interesting = 0;
    let mut mode_sensitive = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lim = OracleLimits::default();
    for i in 0..500usize {
        let params = RandomSystemParams {
            states: 2 + i % 7,
            errors: 1,
            density: if i % 2 == 0 { 0.2 } else { 0.4 },
            repair: repair_edges,
        };
        let sys = random_system(&mut rng, params);
        let goal = random_goal(&mut rng, &sys);
        for k in 0..=3 {
            let engine = safe_k_set(&sys, &goal, k, mode);
            let oracle = brute_force_safe_k(&sys, &goal, k, mode, lim).unwrap();
            assert_eq!(engine, oracle, "safe_{k} system #{i} goal {goal:?} mode {mode}\n{sys:?}");
            let engine = res_k_set(&sys, k, mode, None).0;
            let oracle = brute_force_res_k(&sys, k, mode, lim).unwrap();
            assert_eq!(engine, oracle, "res_{k} system #{i} mode {mode}\n{sys:?}");
            if !engine.is_empty() && engine != sys.non_error() {
                interesting += 1;
            }
            if res_k_set(&sys, k, Mode::Base, None).0 != res_k_set(&sys, k, Mode::Repair, None).0 {
                mode_sensitive += 1;
            }
        }
    }
    (interesting, mode_sensitive)
}

#[test]
fn base_mode_matches_oracle() {
    let (interesting, _) = check_systems(Mode::Base, false, 1);
    assert!(interesting > 100, "{interesting}");
}

#[test]
fn base_mode_ignores_repair_edges() {
    check_systems(Mode::Base, true, 2);
}

#[test]
fn repair_mode_matches_oracle() {
    let (interesting, sensitive) = check_systems(Mode::Repair, true, 3);
    assert!(interesting > 100, "{interesting}");
    assert!(sensitive > 50, "{sensitive}");
}

#[test]
fn repair_mode_without_repair_edges_equals_base() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..200usize {
        let sys = random_system(&mut rng, RandomSystemParams::new(2 + i % 7, 0.3));
        for k in 0..=3 {
            assert_eq!(
                res_k_set(&sys, k, Mode::Base, None).0,
                res_k_set(&sys, k, Mode::Repair, None).0
            );
        }
    }
}

#[test]
fn res_zero_is_safe_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..200usize {
        let sys = random_system(&mut rng, RandomSystemParams::new(2 + i % 7, 0.4));
        let safe0 = resilience_core::game::safe0(&sys, &sys.non_error(), Mode::Base);
        assert_eq!(brute_force_res_k(&sys, 0, Mode::Base, OracleLimits::default()).unwrap(), safe0);
    }
}

#[test]
fn k_max_matches_oracle_levels() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let lim = OracleLimits {
        max_k: 8,
        ..Default::default()
    };
    for i in 0..150usize {
        let sys = random_system(&mut rng, RandomSystemParams::new(2 + i % 6, 0.3));
        let s = StateId(0);
        let level = resilience_core::k_max(&sys, Mode::Base, s).level;
        let member = |k| brute_force_res_k(&sys, k, Mode::Base, lim).unwrap().contains(s);
        match level.as_int() {
            Some(-1) => assert!(!member(0)),
            Some(k) => {
                assert!(member(k as u32));
                assert!(!member(k as u32 + 1));
            }
            None => assert!(member(sys.num_states() as u32)),
        }
    }
}
