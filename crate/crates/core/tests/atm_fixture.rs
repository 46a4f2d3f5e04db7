//! End-to-end checks on the bundled ATM scenario.

use std::path::PathBuf;

use uml2ts_core::check::{check, trace_revalidates};
use uml2ts_core::ctl::parse_ctl;
use uml2ts_core::pipeline::build_unified;
use uml2ts_core::ubd::load_bundle;
use uml2ts_core::UnifiedTs;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures/atm")
        .join(name)
}

fn atm_uts() -> UnifiedTs {
    let bundle = load_bundle(&[
        fixture("atm_sd.ubd"),
        fixture("atm_smd.ubd"),
        fixture("atm_ad.ubd"),
    ])
    .expect("fixture parses");
    build_unified(&bundle).expect("fixture validates")
}

fn requirements() -> Vec<String> {
    std::fs::read_to_string(fixture("requirements.ctl"))
        .unwrap()
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[test]
fn fixture_produces_the_documented_states() {
    let uts = atm_uts();
    let names: Vec<String> = (0..uts.states.len()).map(|i| uts.render_state(i)).collect();
    for expected in [
        "Start-Start-Start",
        "InsertCard-Idle-InsertCard",
        "WaitAccount-CardValidandPinValid-InitiateTransaction",
        "CashAdvance-Chkbal-CheckBalance",
        "InsuffFunds-Modify-ShowBalance",
        "End-Idle-End",
    ] {
        assert!(
            names.iter().any(|n| n == expected),
            "missing {expected}; got:\n{}",
            uts.dump()
        );
    }
    let (declared, reachable) = uts.reachable_stats();
    println!("ATM stats: declared={declared} reachable={reachable}");
    println!("ATM states: {}", uts.states.len());
    println!("ATM transitions: {}", uts.transitions.len());
    println!("--- dump ---\n{}", uts.dump());
}

#[test]
fn requirement_one_is_satisfied() {
    let uts = atm_uts();
    let reqs = requirements();
    let f = parse_ctl(&reqs[0]).unwrap();
    let v = check(&uts, &f).unwrap();
    assert!(v.satisfied, "requirement 1 must hold on the fixture");
}

#[test]
fn requirement_two_is_violated_with_a_lasso() {
    let uts = atm_uts();
    let reqs = requirements();
    let f = parse_ctl(&reqs[1]).unwrap();
    let v = check(&uts, &f).unwrap();
    assert!(!v.satisfied, "requirement 2 must fail on the fixture");
    let trace = v.trace.expect("counterexample supported for this shape");
    assert!(trace_revalidates(&uts, &trace));
    let loop_start = trace.loop_start.expect("violation ends in a lasso");
    let names: Vec<String> = trace.prefix.iter().map(|&i| uts.render_state(i)).collect();
    assert!(
        names.iter().any(|n| n == "InsuffFunds-Modify-ShowBalance"),
        "{names:?}"
    );
    for name in &names[loop_start..] {
        assert_ne!(
            name, "CashAdvance-Chkbal-CheckBalance",
            "the lasso may never offer the cash advance again: {names:?}"
        );
    }
    println!(
        "counterexample:\n{}",
        uml2ts_core::check::format_trace(&uts, &trace)
    );
}
