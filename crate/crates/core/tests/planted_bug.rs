//! Negative control: with the planted-bug feature the invariant suite must
//! fail on a named property with a witness.

#[cfg(feature = "planted-bug")]
#[test]
fn planted_bug_is_caught_with_witness() {
    let suite = mcstack_core::selftest::run_suite(0);
    let failing: Vec<_> = suite.properties.iter().filter(|p| p.failures > 0).collect();
    assert!(!failing.is_empty(), "planted bug was not detected");
    assert!(failing.iter().all(|p| p.witness.is_some()));
    assert!(
        failing
            .iter()
            .any(|p| p.name.starts_with("hochschild/") || p.name.starts_with("dgla/")),
        "failure should name a suite property"
    );
}
