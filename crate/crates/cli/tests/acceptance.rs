//! One line per acceptance criterion; exits nonzero if any line reads FAIL.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;

use proptest::strategy::Strategy;
use proptest::test_runner::{Config, TestRunner};
use sdesym_core::bridge::{self, TransferRule};
use sdesym_core::checks::check_kfe_symmetry;
use sdesym_core::corpus::{self, Section};
use sdesym_core::fields::{equals_mod_x0, lie_bracket, span_membership, FieldBasis, ModX0, SpanResult};
use sdesym_core::jet::JetVar;
use sdesym_core::problem::Problem;
use sdesym_core::{invariance_residual, parse, CaseReport, Expr, Mode, SamplingConfig, Verdict, VectorField};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn symbolic() -> SamplingConfig {
    SamplingConfig::default().with_mode(Mode::Symbolic)
}

fn problem(case: &str) -> Problem {
    corpus::case(case).unwrap().problem.compile().unwrap()
}

/// Passes its check with every residual decided symbolically.
fn passes_symbolically(p: &Problem, key: &str) -> Result<(), String> {
    let c = p.candidate(key).map_err(|e| e.to_string())?;
    let r = c.check(&p.system, &symbolic()).map_err(|e| e.to_string())?;
    ensure(r.passed() && r.all_symbolic(), format!("{key} did not pass symbolically:\n{r}"))
}

fn fails(p: &Problem, key: &str) -> Result<(), String> {
    let c = p.candidate(key).map_err(|e| e.to_string())?;
    let r = c.check(&p.system, &SamplingConfig::default()).map_err(|e| e.to_string())?;
    ensure(!r.passed(), format!("{key} unexpectedly passed"))
}

fn vanishes(v: &VectorField) -> bool {
    v.components().iter().all(|e| e.is_zero_canonical().unwrap())
}

fn offset(p: &Problem, rule: TransferRule, source: &str, listed: &str) -> Result<String, String> {
    let cfg = SamplingConfig::default();
    let c = p.candidate(source).map_err(|e| e.to_string())?;
    let rec = bridge::transfer(rule, &p.system, &c.field, &c.name, &cfg).map_err(|e| e.to_string())?;
    let other = &p.candidate(listed).map_err(|e| e.to_string())?.field;
    match equals_mod_x0(&rec.target, other, p.system.ctx(), &cfg).map_err(|e| e.to_string())? {
        ModX0::Equal { c } => Ok(c.to_string()),
        ModX0::Mismatch { component } => Err(format!("{rule} {source} differs from {listed} in {component}")),
    }
}

fn gbm_sde() -> Outcome {
    let p = problem("gbm");
    for k in ["sde:X1", "sde:X2", "sde:X3"] {
        passes_symbolically(&p, k)?;
    }
    Ok("X1, X2, X3 zero-symbolic on every residual".into())
}

fn gbm_kbe() -> Outcome {
    let p = problem("gbm");
    for k in ["kbe:X1", "kbe:X2", "kbe:X3", "kbe:Y1", "kbe:Y2"] {
        passes_symbolically(&p, k)?;
    }
    Ok("X1-X3 with zero multiplier, Y1, Y2".into())
}

fn gbm_kfe() -> Outcome {
    let p = problem("gbm");
    for k in ["kfe:X1", "kfe:X2", "kfe:X3", "kfe:Y1", "kfe:Y2"] {
        passes_symbolically(&p, k)?;
    }
    let cfg = SamplingConfig::default();
    for y in ["Y1", "Y2"] {
        let c = p.candidate(&format!("kbe:{y}")).unwrap();
        let rec = bridge::kbe_to_kfe(&p.system, &c.field, y, &cfg).map_err(|e| e.to_string())?;
        let listed = &p.candidate(&format!("kfe:{y}")).unwrap().field;
        ensure(vanishes(&rec.target.add(&listed.scale(&Expr::int(-1)))), format!("kbe->kfe {y} is not the listed field"))?;
    }
    let offsets: Vec<String> = ["X1", "X2", "X3"]
        .iter()
        .map(|x| offset(&p, TransferRule::SdeToKfe, &format!("sde:{x}"), &format!("kfe:{x}")))
        .collect::<Result<_, _>>()?;
    ensure(offsets[1] == "-1", format!("X2 offset {}", offsets[1]))?;
    Ok(format!("Y1, Y2 exact; sde->kfe offsets X1 {}, X2 {}, X3 {}", offsets[0], offsets[1], offsets[2]))
}

fn scalar_classification() -> Outcome {
    let cfg = SamplingConfig::default();
    for case in ["heat", "driftAx", "autonomous"] {
        let r = corpus::run_case(case, &cfg).map_err(|e| e.to_string())?;
        ensure(r.all_matched(), format!("{r}"))?;
    }
    let r = corpus::run_case("driftAx", &cfg).unwrap();
    for y in ["kbe:Y2", "kbe:Y3"] {
        let rep = r.outcome(Section::Check, y).and_then(|o| o.report.as_ref()).ok_or(format!("no {y}"))?;
        ensure(!rep.passed(), format!("{y} passed for generic A"))?;
        let factored = rep
            .residuals
            .iter()
            .any(|e| e.parameter_factor.as_ref().is_some_and(|f| f.to_string() == "A - 1"));
        ensure(factored, format!("{y} residual lacks the factor A - 1:\n{rep}"))?;
        let sub = format!("[A=1] {y}");
        let o = r.outcome(Section::Check, &sub).ok_or(format!("no {sub}"))?;
        ensure(o.actual == Verdict::Pass, format!("{sub} fails"))?;
    }
    Ok("heat, driftAx, autonomous lists reproduced; Y2, Y3 carry A - 1".into())
}

fn k_family() -> Outcome {
    let case = corpus::case("kfamily").unwrap();
    let file = &case.problem;
    ensure(
        file.atoms.iter().all(|a| a.rule.is_some()),
        "every atom carries its rewrite rule",
    )?;
    ensure(file.drift.iter().any(|d| d.contains("kp(x)")), "drift is written with the atom")?;
    let p = problem("kfamily");
    for k in ["kbe:X1", "kbe:X2", "kbe:X3", "kfe:X1", "kfe:X2", "kfe:X3"] {
        passes_symbolically(&p, k)?;
    }
    fails(&p, "converse-sde:X2")?;
    fails(&p, "kbe:X3-as-printed")?;
    fails(&p, "kfe:X3-as-printed")?;
    Ok("X1-X3 pass on both equations via the atom rule; converse X2 fails; X3 needs a corrected multiplier".into())
}

fn roundtrip() -> Outcome {
    let reports = corpus::run_all(&SamplingConfig::default()).map_err(|e| e.to_string())?;
    let mut n = 0;
    for r in &reports {
        for o in r.section(Section::Roundtrip) {
            ensure(o.matched(), format!("{} {} {}", r.case, o.subject, o.detail))?;
            n += 1;
        }
    }
    ensure(n > 0, "no roundtrips ran")?;
    let p = problem("integral2d");
    let c = p.candidate("integral-symmetry:I").unwrap();
    let cfg = SamplingConfig::default();
    let kfe = p.system.kfe().map_err(|e| e.to_string())?;
    let own = check_kfe_symmetry(&kfe, &c.field, "I", &cfg).map_err(|e| e.to_string())?;
    ensure(own.passed(), format!("I u_u fails on the forward equation:\n{own}"))?;
    let image = bridge::kbe_to_kfe(&p.system, &c.field, "I", &cfg).map_err(|e| e.to_string())?;
    ensure(vanishes(&image.target.add(&c.field)), "image is not -I u_u")?;
    Ok(format!("{n} backward symmetries return to themselves; I u_u is a forward symmetry, image -I u_u"))
}

fn oracle() -> Outcome {
    let reports = corpus::run_all(&SamplingConfig::default()).map_err(|e| e.to_string())?;
    let (mut pos, mut neg) = (0, 0);
    for r in &reports {
        for o in r.section(Section::Oracle) {
            ensure(o.matched(), format!("{} {}", r.case, o.subject))?;
            if o.actual == Verdict::Pass {
                pos += 1;
            } else {
                neg += 1;
            }
        }
    }
    ensure(neg >= 3, format!("only {neg} negatives"))?;
    let p = problem("gbm");
    let ctx = p.system.ctx();
    let tau = parse("x^2 + t*x", ctx).unwrap();
    let x = VectorField::new(tau.clone(), vec![Expr::zero()]).with_multiplier(Expr::zero());
    let j = invariance_residual(&p.system.kbe(), &x).map_err(|e| e.to_string())?;
    let a = p.system.a_matrix()[0][0].clone();
    let a_tau_x = a.clone() * tau.differentiate("x", ctx).unwrap();
    let coeff = j.coefficient_of(&JetVar::uxxx(0, 0, 0));
    ensure(
        (coeff - Expr::int(2) * a * a_tau_x).is_zero_canonical().unwrap(),
        "u_xxx coefficient is not 2A(A tau_x)",
    )?;
    Ok(format!("{pos} positives, {neg} negatives agree; u_xxx coefficient 2A(A tau_x)"))
}

fn first_integrals() -> Outcome {
    let p = problem("integral2d");
    for k in ["first-integral:I", "integral-symmetry:I", "converse-integral:I"] {
        passes_symbolically(&p, k)?;
    }
    let g = problem("gbm");
    fails(&g, "first-integral:x")?;
    fails(&g, "first-integral:ln(x)")?;
    Ok("integral2d I passes all three; GBM x and ln(x) fail".into())
}

fn closure() -> Outcome {
    let p = problem("gbm");
    let ctx = p.system.ctx();
    let mut basis = FieldBasis::new();
    for k in ["X1", "X2", "X3"] {
        basis.push(k, p.candidate(&format!("sde:{k}")).unwrap().field.clone());
    }
    let mut worst: f64 = 0.0;
    for (i, a) in ["X1", "X2", "X3"].iter().enumerate() {
        for b in ["X1", "X2", "X3"].iter().skip(i + 1) {
            let br = lie_bracket(basis.get(a).unwrap(), basis.get(b).unwrap(), ctx).map_err(|e| e.to_string())?;
            match span_membership(&br, &basis, ctx, &SamplingConfig::default()).map_err(|e| e.to_string())? {
                SpanResult::InSpan { residual, certified, .. } => {
                    ensure(certified && residual < 1e-9, format!("[{a}, {b}] residual {residual:e}, certified {certified}"))?;
                    worst = worst.max(residual);
                }
                SpanResult::NotInSpan { residual } => return Err(format!("[{a}, {b}] outside span ({residual:e})")),
            }
        }
    }
    Ok(format!("three brackets certified, worst residual {worst:.1e}"))
}

fn numeric_mode() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_sdesym"))
            .args(["--format", "json", "catalog", "--mode", "numeric", "--points", "100", "--tol", "1e-9", "--seed", "42"])
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    ensure(a.status.code() == Some(0), String::from_utf8_lossy(&a.stderr).into_owned())?;
    ensure(a.stdout == b.stdout, "reruns differ")?;
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).map_err(|e| e.to_string())?;
    let cases: Vec<CaseReport> = serde_json::from_value(v["cases"].clone()).map_err(|e| e.to_string())?;
    let mut fails = 0;
    for r in &cases {
        for o in r.section(Section::Check) {
            ensure(o.matched(), format!("{} {}", r.case, o.subject))?;
            if o.expected == Verdict::Fail {
                let rep = o.report.as_ref().ok_or("missing report")?;
                ensure(!rep.witnesses().is_empty(), format!("{} {} has no witness", r.case, o.subject))?;
                fails += 1;
            }
        }
    }
    Ok(format!("all verdicts hold, {fails} failures with witnesses, reruns byte-identical"))
}

fn run_property<S: Strategy>(name: &str, s: S, check: impl Fn(S::Value) -> bool) -> Result<u32, String> {
    let mut runner = TestRunner::new(Config {
        cases: support::CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&s, |v| {
            assert!(check(v));
            Ok(())
        })
        .map_err(|e| format!("{name}: {e}"))?;
    Ok(support::CASES)
}

fn properties() -> Outcome {
    use support::*;
    let n = run_property("mixed partials", expr(), |e| mixed_partials_commute(&e))?;
    run_property("normalize", expr(), |e| normalize_idempotent(&e))?;
    run_property("antisymmetry", (field(), field()), |(x, y)| bracket_antisymmetric(&x, &y))?;
    run_property("jacobi", (field(), field(), field()), |(x, y, z)| jacobi(&x, &y, &z))?;
    run_property("ito product", (system(), expr(), expr()), |(s, f, g)| ito_product(&s, &f, &g))?;
    Ok(format!("five identities, {n} instances each"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("GBM SDE symmetries", gbm_sde),
        ("GBM backward equation", gbm_kbe),
        ("GBM forward equation and transfers", gbm_kfe),
        ("scalar classification", scalar_classification),
        ("k(x) family", k_family),
        ("roundtrip and integral fields", roundtrip),
        ("jet oracle agreement", oracle),
        ("first integrals", first_integrals),
        ("Lie algebra closure", closure),
        ("numeric mode", numeric_mode),
        ("property suites", properties),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
