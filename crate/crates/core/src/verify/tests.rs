use super::*;
use crate::construction::{base_case, build};

#[test]
fn base_state_passes_every_check() {
    let st = base_case();
    let r = check_all(&st, None, &Params::default()).unwrap();
    assert!(r.passed(), "{}", r.to_markdown());
    assert_eq!(r.checks.len(), CHECKS.len());
}

#[test]
fn missing_predecessor_is_an_error() {
    let states = build(1).unwrap();
    assert!(matches!(check_all(&states[1], None, &Params::default()), Err(VerifyError::MissingPrevious(1))));
}

#[test]
fn verdict_order() {
    assert_eq!(Verdict::Proved.and(Verdict::Inconclusive), Verdict::Inconclusive);
    assert_eq!(Verdict::Failed.and(Verdict::VerifiedToBound), Verdict::Failed);
}
