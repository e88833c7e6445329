//! Structural invariants beyond the acceptance battery: kernel identities,
//! limit consistency, root uniqueness, stationarity cross-checks, start
//! dispersion diagnostics, and mutation sensitivity.

use mdregion::verify;

const SEED: u64 = 0x10af_51de;

#[test]
fn kernel_identities() {
    let o = verify::suite_linalg(SEED);
    assert!(o.passed(), "{}", o.describe());
}

#[test]
fn vanishing_ladder_limit() {
    let o = verify::suite_limit_consistency(SEED);
    assert!(o.passed(), "{}", o.describe());
}

#[test]
fn bisection_uniqueness() {
    let o = verify::suite_bisection_uniqueness(SEED);
    assert!(o.passed(), "{}", o.describe());
}

#[test]
fn stationarity_residuals() {
    let o = verify::suite_stationarity(SEED);
    assert!(o.passed(), "{}", o.describe());
}

#[test]
fn start_dispersion() {
    let o = verify::suite_start_dispersion(SEED);
    assert!(o.passed(), "{}", o.describe());
    for note in &o.flags {
        println!("{note}");
    }
}

#[test]
fn mutation_sensitivity() {
    let o = verify::suite_mutation_sensitivity(SEED);
    assert!(o.passed(), "{}", o.describe());
}
