use resilience_bench::{avionics, simple_voting, voting};
use resilience_cefsm::{compile_text, CompileOptions};
use resilience_core::{k_max, Mode};

fn levels(text: &str) -> (Option<i64>, Option<i64>, usize, usize) {
    let counter = compile_text(text, CompileOptions::default()).unwrap().system;
    let explicit = compile_text(
        text,
        CompileOptions {
            explicit_identities: true,
            ..Default::default()
        },
    )
    .unwrap()
    .system;
    (
        k_max(&counter, Mode::Repair, counter.initial()).level.as_int(),
        k_max(&explicit, Mode::Repair, explicit.initial()).level.as_int(),
        counter.num_states(),
        explicit.num_states(),
    )
}

#[test]
fn avionics_two_two_counter_matches_explicit() {
    let (c, e, nc, ne) = levels(&avionics(2, 2));
    assert_eq!(c, e);
    assert!(ne > nc, "explicit identities should not merge states");
}

#[test]
fn small_models_counter_matches_explicit() {
    for n in 1..=3 {
        for m in 1..=3 {
            let (c, e, ..) = levels(&avionics(n, m));
            assert_eq!(c, e, "avionics({n},{m})");
        }
    }
    for r in 1..=3 {
        let (c, e, ..) = levels(&voting(r));
        assert_eq!(c, e, "voting({r})");
        let (c, e, ..) = levels(&simple_voting(r));
        assert_eq!(c, e, "simple_voting({r})");
    }
}

#[test]
fn shipped_avionics_model_matches_generator() {
    let shipped = include_str!("../../../models/avionics.cefsm");
    assert_eq!(shipped, avionics(3, 3));
    let model = resilience_cefsm::parse(shipped).unwrap();
    assert_eq!(model.templates.len(), 2);
    assert_eq!(model.templates[0].count, 3);
    assert_eq!(model.templates[1].count, 3);
    let vars: Vec<_> = model.vars.iter().map(|v| v.name.as_str()).collect();
    assert_eq!(vars, ["crp", "cfp", "crm", "cfm"]);
    assert_eq!(model.channels, ["fd", "rs"]);
}

#[test]
fn avionics_one_one_processor_failure_is_fatal() {
    let compiled = compile_text(&avionics(1, 1), CompileOptions::default()).unwrap();
    let sys = &compiled.system;
    let init = sys.initial();
    let failures = sys.successors(init, resilience_core::EdgeKind::Uncontrolled);
    assert_eq!(failures.len(), 2);
    let after_processor_failure = failures
        .iter()
        .find(|&&t| compiled.dictionary.var(t, "cfp") == Some(1))
        .unwrap();
    assert!(sys.is_error(*after_processor_failure));
}
