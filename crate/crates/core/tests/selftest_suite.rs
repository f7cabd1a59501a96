#[test]
fn suite_passes_and_is_deterministic() {
    let r1 = mcstack_core::selftest::run_suite(7);
    for p in &r1.properties {
        assert_eq!(p.failures, 0, "{}: {:?}", p.name, p.witness);
    }
    let r2 = mcstack_core::selftest::run_suite(7);
    let fmt = |r: &mcstack_core::selftest::SuiteReport| {
        r.properties
            .iter()
            .map(|p| format!("{}:{}:{}", p.name, p.instances, p.failures))
            .collect::<Vec<_>>()
            .join(";")
    };
    assert_eq!(fmt(&r1), fmt(&r2));
}
