mod common;

#[test]
fn solvers_match_dense_ground_truth() {
    let failures = common::small_oracle_failures(220);
    assert!(failures.is_empty(), "{failures:#?}");
}
