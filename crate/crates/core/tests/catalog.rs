use sdesym_core::corpus::{self, Section};
use sdesym_core::{Mode, ProblemFile, SamplingConfig, Verdict};

fn numeric() -> SamplingConfig {
    SamplingConfig::default().with_mode(Mode::Numeric)
}

#[test]
fn every_case_matches_in_each_mode() {
    for mode in [Mode::Symbolic, Mode::Numeric, Mode::Both] {
        let cfg = SamplingConfig::default().with_mode(mode);
        for r in corpus::run_all(&cfg).unwrap() {
            assert!(r.all_matched(), "{mode:?}\n{r}");
        }
    }
}

#[test]
fn numeric_failures_carry_witnesses() {
    for r in corpus::run_all(&numeric()).unwrap() {
        for o in r.section(Section::Check) {
            let rep = o.report.as_ref().unwrap();
            if o.actual == Verdict::Fail {
                assert!(!rep.witnesses().is_empty(), "{} {}", r.case, o.subject);
            } else {
                assert!(rep.witnesses().is_empty(), "{} {}", r.case, o.subject);
            }
        }
    }
}

#[test]
fn exported_files_reproduce_catalog_verdicts() {
    let cfg = SamplingConfig::default();
    for case in corpus::catalog() {
        let report = case.run(&cfg).unwrap();
        let mut subs: Vec<(String, Option<&str>)> = vec![(String::new(), None)];
        subs.extend(case.subcases.iter().map(|s| (format!("[{}] ", s.name), Some(s.name.as_str()))));
        for (prefix, sub) in subs {
            let text = case.export(sub).unwrap().to_json();
            let file = ProblemFile::from_json(&text).unwrap();
            assert_eq!(file.to_json(), text);
            let p = file.compile().unwrap();
            for c in &p.candidates {
                let rep = c.check(&p.system, &cfg).unwrap();
                let subject = format!("{prefix}{}", c.key());
                let o = report.outcome(Section::Check, &subject).unwrap();
                assert_eq!(rep.verdict, o.actual, "{} {subject}", case.name);
                assert_eq!(Some(&rep), o.report.as_ref());
            }
        }
    }
}

#[test]
fn same_seed_same_report() {
    let cfg = SamplingConfig {
        seed: 7,
        ..numeric()
    };
    let a = serde_json::to_string(&corpus::run_all(&cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&corpus::run_all(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn tags_select_cases() {
    assert_eq!(corpus::list_cases(None).len(), 7);
    assert_eq!(corpus::list_cases(Some("gbm")), vec!["gbm"]);
    assert!(corpus::run_case("nosuch", &numeric()).is_err());
}

#[test]
fn drift_ax_needs_a_equal_one() {
    let r = corpus::run_case("driftAx", &SamplingConfig::default()).unwrap();
    for y in ["kbe:Y2", "kbe:Y3"] {
        let o = r.outcome(Section::Check, y).unwrap();
        assert_eq!(o.actual, Verdict::Fail);
        let rep = o.report.as_ref().unwrap();
        let factored = rep
            .residuals
            .iter()
            .filter_map(|e| e.parameter_factor.as_ref())
            .any(|f| f.to_string() == "A - 1");
        assert!(factored, "{rep}");
    }
    let subs: Vec<_> = r.outcomes.iter().filter(|o| o.subject.starts_with("[A=1] kbe:Y")).collect();
    assert!(!subs.is_empty());
    assert!(subs.iter().all(|o| o.actual == Verdict::Pass));
}
