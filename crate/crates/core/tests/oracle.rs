use sdesym_core::corpus::{self, Section};
use sdesym_core::jet::{check_invariance, JetVar};
use sdesym_core::{invariance_residual, parse, Expr, SamplingConfig, Verdict, VectorField};

#[test]
fn oracle_agrees_with_determining_equations() {
    let cfg = SamplingConfig::default();
    let mut negatives = 0;
    let mut positives = 0;
    for r in corpus::run_all(&cfg).unwrap() {
        for o in r.section(Section::Oracle) {
            assert_eq!(o.expected, o.actual, "{} {}", r.case, o.subject);
            match o.actual {
                Verdict::Pass => positives += 1,
                Verdict::Fail => negatives += 1,
            }
        }
    }
    assert!(positives >= 20, "{positives}");
    assert!(negatives >= 3, "{negatives}");
}

#[test]
fn third_order_coefficient_carries_a_tau_x() {
    let p = corpus::case("gbm").unwrap().problem.compile().unwrap();
    let s = &p.system;
    let ctx = s.ctx();
    let kbe = s.kbe();
    let tau = parse("x^2 + t*x", ctx).unwrap();
    let x = VectorField::new(tau.clone(), vec![Expr::zero()]).with_multiplier(Expr::zero());
    let j = invariance_residual(&kbe, &x).unwrap();
    let a = &s.a_matrix()[0][0];
    let expected = Expr::int(2) * a.clone() * a.clone() * tau.differentiate("x", ctx).unwrap();
    let got = j.coefficient_of(&JetVar::uxxx(0, 0, 0));
    assert!((got - expected).is_zero_canonical().unwrap());
    let rep = check_invariance(&kbe, &x, "tau", &SamplingConfig::default()).unwrap();
    assert!(!rep.passed());
    assert!(rep.residual("u_xxx").is_some(), "{rep}");
}
