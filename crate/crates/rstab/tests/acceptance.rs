//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `cargo test --release --test acceptance -- --nocapture` to see
//! the lines for passing criteria too).

use rstab::checks::run_suite;

fn run(name: &str, label: &str) {
    let outcomes = run_suite(name).unwrap_or_else(|e| panic!("{label}: suite error: {e}"));
    let mut all = true;
    for o in &outcomes {
        println!("ACCEPTANCE {label} [{}]", o.line());
        all &= o.pass;
    }
    assert!(all, "{label} failed; see lines above");
}

#[test]
fn criterion_01_newton_identity_suite() {
    run("identities", "1 newton-identities");
}

#[test]
fn criterion_02_space_form_drift_vanishing() {
    run("drift", "2 drift-vanishing");
}

#[test]
fn criterion_03_linearization_of_s_r_plus_1() {
    run("linearization", "3 linearization");
}

#[test]
fn criterion_04_spectra_oracle() {
    run("spectra", "4 spectra-oracle");
}

#[test]
fn criterion_05_second_variation() {
    run("second_variation", "5 second-variation");
}

#[test]
fn criterion_06_symmetrization() {
    run("symmetrization", "6 symmetrization");
}

#[test]
fn criterion_07_adjoint() {
    run("adjoint", "7 adjoint");
}

#[test]
fn criterion_08_collatz_wielandt() {
    run("collatz", "8 collatz-wielandt");
}

#[test]
fn criterion_09_geodesic_ball_bound() {
    run("bound", "9 ball-lower-bound");
}

#[test]
fn criterion_10_nonselfadjoint_oracle() {
    run("nonselfadjoint", "10 nonselfadjoint-oracle");
}
