//! Acceptance suite: one test per shipped guarantee, each printing a
//! pass/fail line with the measured quantities.
//!
//! Run with `cargo test -p mefem --test acceptance -- --nocapture` to see
//! the table.

use mefem::verify::{
    check_algebra_identities, check_constitutive_derivatives, check_coupled_consistency,
    check_covariant_derivative, check_discrete_complex, check_elastic_convergence,
    check_magnetostatic_exactness, check_patch_test, check_rigid_invariance,
    check_slab_traction, check_stress_isomorphism, CheckResult,
};

const SEED: u64 = 42;

fn gate(criterion: usize, result: CheckResult) {
    println!(
        "ACCEPTANCE {:2} [{}] {} — {}",
        criterion,
        if result.passed { "PASS" } else { "FAIL" },
        result.name,
        result.detail
    );
    assert!(result.passed, "criterion {criterion} failed: {}", result.detail);
}

#[test]
fn criterion_01_stress_isomorphism_matrix() {
    // diagonal 9x9 with unit entries, exact round trip
    gate(1, check_stress_isomorphism());
}

#[test]
fn criterion_02_algebraic_identities() {
    // wedge/dot-wedge anticommutativity, valued Hodge pairing, star
    // involution, sym+skw, interior-product antiderivation; 1e-12 relative
    // on 1000 randomized samples
    gate(2, check_algebra_identities(SEED, 1000));
}

#[test]
fn criterion_03_discrete_complex_exactness() {
    gate(3, check_discrete_complex(&[2, 4, 8, 16, 32]));
}

#[test]
fn criterion_04_covariant_derivative_identity() {
    gate(4, check_covariant_derivative(SEED));
}

#[test]
fn criterion_05_constitutive_derivative_orders() {
    gate(5, check_constitutive_derivatives(SEED));
}

#[test]
fn criterion_06_rigid_invariance() {
    gate(6, check_rigid_invariance(SEED));
}

#[test]
fn criterion_07_patch_test() {
    gate(7, check_patch_test(SEED));
}

#[test]
fn criterion_08_magnetostatic_exactness() {
    gate(8, check_magnetostatic_exactness(&[2, 4, 8, 16]));
}

#[test]
fn criterion_09_manufactured_convergence() {
    gate(9, check_elastic_convergence(&[8, 16, 32]));
}

#[test]
fn criterion_10_coupled_consistency() {
    gate(10, check_coupled_consistency(16));
}

#[test]
fn criterion_11_interface_traction() {
    gate(11, check_slab_traction(16));
}
