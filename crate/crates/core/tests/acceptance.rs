use ckn_core::acceptance::{self, AcceptanceConfig};

fn check(id: u8) {
    let out = acceptance::run(id, &AcceptanceConfig::default()).expect("known criterion");
    println!("{}", out.line());
    assert!(out.passed, "{}", out.line());
}

#[test]
fn ac01_euler_lagrange_residual() {
    check(1);
}

#[test]
fn ac02_closed_form_norms() {
    check(2);
}

#[test]
fn ac03_spectral_identities() {
    check(3);
}

#[test]
fn ac04_non_degeneracy() {
    check(4);
}

#[test]
fn ac05_spectral_gap() {
    check(5);
}

#[test]
fn ac06_stability_exponent() {
    check(6);
}

#[test]
fn ac07_poincare_bound() {
    check(7);
}

#[test]
fn ac08_lam_lu_identities() {
    check(8);
}

#[test]
fn ac09_appendix_inequalities() {
    check(9);
}

#[test]
fn ac10_regions() {
    check(10);
}
