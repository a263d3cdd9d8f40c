use resilience_bench::BenchmarkSpec;
use resilience_core::oracle::{brute_force_res_k, OracleLimits};
use resilience_core::{k_max, Mode, TransitionSystem};

fn limits(sys: &TransitionSystem) -> OracleLimits {
    OracleLimits {
        max_states: sys.num_states(),
        max_k: 16,
        ..Default::default()
    }
}

/// k_max of the initial state equals the design level, and the oracle
/// agrees on both sides of it.
fn check(spec: BenchmarkSpec) {
    let sys = spec.system().unwrap();
    assert!(sys.validate().is_empty(), "{spec}");
    let expected = spec.expected_k();
    let level = k_max(&sys, Mode::Repair, sys.initial()).level;
    assert_eq!(level.as_int(), Some(expected), "{spec}");
    let lim = limits(&sys);
    let init = sys.initial();
    if expected >= 0 {
        let res = brute_force_res_k(&sys, expected as u32, Mode::Repair, lim).unwrap();
        assert!(res.contains(init), "{spec}: oracle rejects k={expected}");
    }
    let above = brute_force_res_k(&sys, (expected + 1) as u32, Mode::Repair, lim).unwrap();
    assert!(!above.contains(init), "{spec}: oracle accepts k={}", expected + 1);
}

#[test]
fn avionics_levels() {
    for n in 1..=4 {
        for m in 1..=4 {
            check(BenchmarkSpec::Avionics { n, m });
        }
    }
}

#[test]
fn voting_levels() {
    for r in 1..=7 {
        check(BenchmarkSpec::Voting { r });
        check(BenchmarkSpec::SimpleVoting { r });
    }
}

#[test]
fn pbft_levels() {
    for r in 1..=4 {
        check(BenchmarkSpec::Pbft { r });
    }
}

#[test]
fn clock_sync_levels() {
    for s in 1..=5 {
        check(BenchmarkSpec::ClockSync { s });
    }
}

#[test]
fn chain_levels() {
    for len in 1..=6 {
        check(BenchmarkSpec::Chain { len });
        let sys = BenchmarkSpec::Chain { len }.system().unwrap();
        let base = k_max(&sys, Mode::Base, sys.initial()).level;
        assert_eq!(base.as_int(), Some(len as i64 + 1));
    }
}

#[test]
fn avionics_needs_repairs() {
    // without repair transitions no memory can be rewritten
    let sys = BenchmarkSpec::Avionics { n: 3, m: 3 }.system().unwrap();
    assert_eq!(k_max(&sys, Mode::Base, sys.initial()).level.as_int(), Some(0));
}
