//! The acceptance gate: one test per repro criterion, so the test runner
//! prints a pass/fail line for each. Details (residuals, KS statistics,
//! timings) go to stdout and into the assertion message on failure.

use snt_core::acceptance;

fn check(id: &str) {
    let out = acceptance::run(id).expect("criterion id is known");
    println!("[{}] {}", out.id, out.detail);
    assert!(out.pass, "{} failed: {}", out.id, out.detail);
}

#[test]
fn c01_gamma_family_fixed_point() {
    check("gamma-family-fixed-point");
}

#[test]
fn c02_sech2_closed_form() {
    check("sech2-closed-form");
}

#[test]
fn c03_monte_carlo_fixed_point() {
    check("monte-carlo-fixed-point");
}

#[test]
fn c04_exp_response_linnik() {
    check("exp-response-linnik");
}

#[test]
fn c05_s2_family_fixed_point() {
    check("s2-family-fixed-point");
}

#[test]
fn c06_fixed_point_iteration() {
    check("fixed-point-iteration");
}

#[test]
fn c07_gamma_perpetuity() {
    check("gamma-perpetuity");
}

#[test]
fn c08_stable_subordination() {
    check("stable-subordination");
}

#[test]
fn c09_levy_steutel_feature() {
    check("levy-steutel-feature");
}

#[test]
fn c10_logconcave_counterexample() {
    check("logconcave-counterexample");
}

#[test]
fn c11_atom_equation() {
    check("atom-equation");
}

#[test]
fn c12_determinism() {
    check("determinism");
}
