//! Acceptance gate: runs every criterion of the battery and prints one
//! pass/fail line each. `cargo test --test acceptance` is the exit check;
//! the same battery is reachable from the CLI via `reachctrl verify all`.

use reachctrl::harness::battery::{run_criterion, CriterionReport};

fn run(id: usize) -> CriterionReport {
    let rep = run_criterion(id);
    println!("{}", rep.line());
    rep
}

#[test]
fn criterion_1_interval_soundness() {
    let rep = run(1);
    assert!(rep.passed, "{}", rep.detail);
}

#[test]
fn criterion_2_contraction_optimality() {
    let rep = run(2);
    assert!(rep.passed, "{}", rep.detail);
}

#[test]
fn criterion_3_inclusion_soundness() {
    let rep = run(3);
    assert!(rep.passed, "{}", rep.detail);
}

#[test]
fn criterion_4_reach_containment() {
    let rep = run(4);
    assert!(rep.passed, "{}", rep.detail);
}

#[test]
fn criterion_5_monotonicity() {
    let rep = run(5);
    assert!(rep.passed, "{}", rep.detail);
}

#[test]
fn criterion_6_scp_vs_oracle() {
    let rep = run(6);
    assert!(rep.passed, "{}", rep.detail);
}

#[test]
fn criterion_7_suboptimality_bound() {
    let rep = run(7);
    assert!(rep.passed, "{}", rep.detail);
}

#[test]
fn criterion_8_end_to_end_episode() {
    let rep = run(8);
    assert!(rep.passed, "{}", rep.detail);
}

#[test]
fn criterion_9_lp_correctness() {
    let rep = run(9);
    assert!(rep.passed, "{}", rep.detail);
}
