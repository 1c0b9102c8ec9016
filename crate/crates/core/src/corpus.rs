//! Built-in catalog of worked examples with expected verdicts, transfers and
//! bracket relations.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bridge::{kbe_to_kfe, kfe_to_kbe, sde_to_kbe, sde_to_kfe, transfer, BridgeError, TransferRule};
use crate::checks::{check_kbe_symmetry, check_kfe_symmetry, CheckReport, Verdict};
use crate::expr::{is_zero, parse, Expr, Rational, SamplingConfig};
use crate::fields::{equals_mod_x0, lie_bracket, span_membership, FieldBasis, FieldError, ModX0, SpanResult, VectorField};
use crate::jet::check_invariance;
use crate::problem::{CandidateKind, CandidateSpec, Problem, ProblemError, ProblemFile};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorpusError {
    #[error("unknown case `{0}`")]
    UnknownCase(String),
    #[error("case `{case}`: {source}")]
    Problem {
        case: String,
        #[source]
        source: ProblemError,
    },
    #[error("case `{case}`: {message}")]
    Run { case: String, message: String },
}

/// What a transfer is expected to produce.
#[derive(Clone, Debug, PartialEq)]
pub enum TransferExpect {
    /// The source fails its own check.
    Refused,
    /// The image equals `listed` up to `c·u∂_u`, with `c = multiplier(image) - multiplier(listed)`.
    Matches { listed: String, offset: Rational },
    /// The image passes its target check; nothing else is compared.
    Verified,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferSpec {
    pub rule: TransferRule,
    /// `kind:name` of the source candidate.
    pub source: String,
    pub expect: TransferExpect,
}

/// `[left, right]` is expected to equal `Σ coefficients[k]·basis[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketSpec {
    pub left: String,
    pub right: String,
    pub basis: Vec<String>,
    pub coefficients: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Subcase {
    pub name: String,
    pub problem: ProblemFile,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogCase {
    pub name: &'static str,
    pub tags: &'static [&'static str],
    pub summary: &'static str,
    pub problem: ProblemFile,
    pub subcases: Vec<Subcase>,
    pub transfers: Vec<TransferSpec>,
    pub brackets: Vec<BracketSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    Check,
    Oracle,
    Transfer,
    Roundtrip,
    Triangle,
    Corollary,
    Bracket,
}

impl Section {
    pub fn name(self) -> &'static str {
        match self {
            Section::Check => "check",
            Section::Oracle => "oracle",
            Section::Transfer => "transfer",
            Section::Roundtrip => "roundtrip",
            Section::Triangle => "triangle",
            Section::Corollary => "corollary",
            Section::Bracket => "bracket",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub section: Section,
    pub subject: String,
    pub expected: Verdict,
    pub actual: Verdict,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<CheckReport>,
}

impl Outcome {
    pub fn matched(&self) -> bool {
        self.expected == self.actual
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case: String,
    pub outcomes: Vec<Outcome>,
}

impl CaseReport {
    pub fn all_matched(&self) -> bool {
        self.outcomes.iter().all(Outcome::matched)
    }

    pub fn outcome(&self, section: Section, subject: &str) -> Option<&Outcome> {
        self.outcomes
            .iter()
            .find(|o| o.section == section && o.subject == subject)
    }

    pub fn section(&self, section: Section) -> impl Iterator<Item = &Outcome> {
        self.outcomes.iter().filter(move |o| o.section == section)
    }

    pub fn mismatches(&self) -> Vec<&Outcome> {
        self.outcomes.iter().filter(|o| !o.matched()).collect()
    }
}

impl fmt::Display for CaseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.all_matched() { "OK" } else { "MISMATCH" };
        writeln!(f, "case {} ... {status}", self.case)?;
        let width = self.outcomes.iter().map(|o| o.subject.len()).max().unwrap_or(0);
        for o in &self.outcomes {
            let mark = if o.matched() { "ok " } else { "BAD" };
            write!(
                f,
                "  {mark} {:<9} {:<width$}  {}",
                o.section.name(),
                o.subject,
                o.actual
            )?;
            if o.expected != o.actual {
                write!(f, " (expected {})", o.expected)?;
            }
            if !o.detail.is_empty() {
                write!(f, "  {}", o.detail)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

const NAMES: [&str; 7] = ["heat", "driftAx", "autonomous", "gbm", "kfamily", "integral2d", "generic-negative"];

/// Case names in catalog order, optionally restricted to a tag.
pub fn list_cases(tag: Option<&str>) -> Vec<&'static str> {
    match tag {
        None => NAMES.to_vec(),
        Some(t) => catalog()
            .into_iter()
            .filter(|c| c.name == t || c.tags.contains(&t))
            .map(|c| c.name)
            .collect(),
    }
}

pub fn catalog() -> Vec<CatalogCase> {
    vec![heat(), drift_ax(), autonomous(), gbm(), kfamily(), integral2d(), generic_negative()]
}

pub fn case(name: &str) -> Result<CatalogCase, CorpusError> {
    catalog()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| CorpusError::UnknownCase(name.to_string()))
}

pub fn run_case(name: &str, cfg: &SamplingConfig) -> Result<CaseReport, CorpusError> {
    case(name)?.run(cfg)
}

/// Runs every case concurrently; reports come back in catalog order.
pub fn run_all(cfg: &SamplingConfig) -> Result<Vec<CaseReport>, CorpusError> {
    catalog().par_iter().map(|c| c.run(cfg)).collect()
}

impl CatalogCase {
    pub fn run(&self, cfg: &SamplingConfig) -> Result<CaseReport, CorpusError> {
        let mut out = Vec::new();
        let problem = self.compile(&self.problem)?;
        Runner {
            case: self.name,
            problem: &problem,
            cfg,
            prefix: String::new(),
            out: &mut out,
        }
        .run(&self.transfers, &self.brackets)?;
        for sub in &self.subcases {
            let p = self.compile(&sub.problem)?;
            Runner {
                case: self.name,
                problem: &p,
                cfg,
                prefix: format!("[{}] ", sub.name),
                out: &mut out,
            }
            .run(&[], &[])?;
        }
        Ok(CaseReport {
            case: self.name.to_string(),
            outcomes: out,
        })
    }

    fn compile(&self, f: &ProblemFile) -> Result<Problem, CorpusError> {
        f.compile().map_err(|source| CorpusError::Problem {
            case: self.name.to_string(),
            source,
        })
    }

    /// The case as a problem file; `subcase` selects a parameter specialization.
    pub fn export(&self, subcase: Option<&str>) -> Result<ProblemFile, CorpusError> {
        match subcase {
            None => Ok(self.problem.clone()),
            Some(s) => self
                .subcases
                .iter()
                .find(|c| c.name == s)
                .map(|c| c.problem.clone())
                .ok_or_else(|| CorpusError::UnknownCase(format!("{}/{s}", self.name))),
        }
    }
}

struct Runner<'a> {
    case: &'a str,
    problem: &'a Problem,
    cfg: &'a SamplingConfig,
    prefix: String,
    out: &'a mut Vec<Outcome>,
}

impl Runner<'_> {
    fn fail(&self, message: impl fmt::Display) -> CorpusError {
        CorpusError::Run {
            case: self.case.to_string(),
            message: message.to_string(),
        }
    }

    fn push(&mut self, section: Section, subject: String, expected: Verdict, actual: Verdict, detail: String, report: Option<CheckReport>) {
        self.out.push(Outcome {
            section,
            subject: format!("{}{subject}", self.prefix),
            expected,
            actual,
            detail,
            report,
        });
    }

    fn run(mut self, transfers: &[TransferSpec], brackets: &[BracketSpec]) -> Result<(), CorpusError> {
        let s = &self.problem.system;
        let mut verdicts = BTreeMap::new();
        for c in &self.problem.candidates {
            let rep = c.check(s, self.cfg).map_err(|e| self.fail(format!("{}: {e}", c.key())))?;
            verdicts.insert(c.key(), rep.verdict);
            let expected = c.expect.unwrap_or(rep.verdict);
            let detail = failure_detail(&rep);
            self.push(Section::Check, c.key(), expected, rep.verdict, detail, Some(rep));
        }
        self.oracle()?;
        for t in transfers {
            self.transfer(t)?;
        }
        self.automatic_transfers()?;
        for b in brackets {
            self.bracket(b)?;
        }
        Ok(())
    }

    /// Jet-space invariance against the determining-equation verdicts.
    fn oracle(&mut self) -> Result<(), CorpusError> {
        let s = &self.problem.system;
        let kbe = s.kbe();
        let kfe = s.kfe().map_err(|e| self.fail(e))?;
        for c in &self.problem.candidates {
            let (eq, field, reference) = match c.kind {
                CandidateKind::Sde => {
                    let f = VectorField {
                        multiplier: Some(Expr::zero()),
                        ..c.field.clone()
                    };
                    let r = check_kbe_symmetry(&kbe, &f, &c.name, self.cfg).map_err(|e| self.fail(e))?;
                    (&kbe, f, r.verdict)
                }
                CandidateKind::Kbe | CandidateKind::IntegralSymmetry | CandidateKind::Trivial => {
                    let r = c.check(s, self.cfg).map_err(|e| self.fail(e))?;
                    (&kbe, c.field.clone(), r.verdict)
                }
                CandidateKind::Kfe => {
                    let r = check_kfe_symmetry(&kfe, &c.field, &c.name, self.cfg).map_err(|e| self.fail(e))?;
                    (&kfe, c.field.clone(), r.verdict)
                }
                _ => continue,
            };
            let rep = check_invariance(eq, &field, &c.name, self.cfg).map_err(|e| self.fail(e))?;
            let eq_name = match eq.kind() {
                crate::model::EquationKind::Backward => "kbe",
                crate::model::EquationKind::Forward => "kfe",
            };
            let subject = format!("{} on {eq_name}", c.key());
            let detail = failure_detail(&rep);
            self.push(Section::Oracle, subject, reference, rep.verdict, detail, Some(rep));
        }
        Ok(())
    }

    fn field_of(&self, key: &str) -> Result<&VectorField, CorpusError> {
        self.problem
            .candidate(key)
            .map(|c| &c.field)
            .map_err(|e| self.fail(e))
    }

    fn transfer(&mut self, t: &TransferSpec) -> Result<(), CorpusError> {
        let s = &self.problem.system;
        let src = self.field_of(&t.source)?.clone();
        let subject = format!("{} {}", t.rule, t.source);
        let result = transfer(t.rule, s, &src, &t.source, self.cfg);
        match (&t.expect, result) {
            (TransferExpect::Refused, Err(BridgeError::Refused { report, .. })) => {
                self.push(Section::Transfer, subject, Verdict::Fail, Verdict::Fail, "refused".into(), Some(*report));
            }
            (TransferExpect::Refused, Ok(rec)) => {
                let detail = format!("unexpectedly produced {}", rec.target.display(s.ctx()));
                self.push(Section::Transfer, subject, Verdict::Fail, Verdict::Pass, detail, Some(rec.target_report));
            }
            (_, Err(BridgeError::Refused { report, .. })) | (_, Err(BridgeError::TargetFailed { report, .. })) => {
                self.push(Section::Transfer, subject, Verdict::Pass, Verdict::Fail, "refused".into(), Some(*report));
            }
            (_, Err(e)) => return Err(self.fail(e)),
            (TransferExpect::Verified, Ok(rec)) => {
                let detail = format!("-> {}", rec.target.display(s.ctx()));
                self.push(Section::Transfer, subject, Verdict::Pass, Verdict::Pass, detail, Some(rec.target_report));
            }
            (TransferExpect::Matches { listed, offset }, Ok(rec)) => {
                let other = self.field_of(listed)?;
                let m = equals_mod_x0(&rec.target, other, s.ctx(), self.cfg).map_err(|e| self.fail(e))?;
                let (ok, detail) = match m {
                    ModX0::Equal { c } => (
                        &c == offset,
                        format!("-> {}; equals {listed} with offset {c}", rec.target.display(s.ctx())),
                    ),
                    ModX0::Mismatch { component } => (false, format!("differs from {listed} in {component}")),
                };
                self.push(Section::Transfer, subject, Verdict::Pass, Verdict::from_bool(ok), detail, Some(rec.target_report));
            }
        }
        Ok(())
    }

    /// Roundtrips, commuting triangles and the integral-field images, for
    /// every candidate expected to pass.
    fn automatic_transfers(&mut self) -> Result<(), CorpusError> {
        let s = &self.problem.system;
        let ctx = s.ctx();
        let cfg = self.cfg;
        let passing: Vec<_> = self
            .problem
            .candidates
            .iter()
            .filter(|c| c.expect == Some(Verdict::Pass))
            .collect();
        for c in passing {
            let x = &c.field;
            match c.kind {
                CandidateKind::Kbe => {
                    let (ok, detail) = match kbe_to_kfe(s, x, &c.name, cfg)
                        .and_then(|r| kfe_to_kbe(s, &r.target, &c.name, cfg))
                    {
                        Ok(back) => same_field(&back.target, x, ctx, cfg).map_err(|e| self.fail(e))?,
                        Err(e) => (false, e.to_string()),
                    };
                    self.push(Section::Roundtrip, c.key(), Verdict::Pass, Verdict::from_bool(ok), detail, None);
                }
                CandidateKind::Sde => {
                    let direct = sde_to_kfe(s, x, &c.name, cfg);
                    let via = sde_to_kbe(s, x, &c.name, cfg).and_then(|r| kbe_to_kfe(s, &r.target, &c.name, cfg));
                    let (ok, detail) = match (direct, via) {
                        (Ok(a), Ok(b)) => same_field(&a.target, &b.target, ctx, cfg).map_err(|e| self.fail(e))?,
                        (Err(e), _) | (_, Err(e)) => (false, e.to_string()),
                    };
                    self.push(Section::Triangle, c.key(), Verdict::Pass, Verdict::from_bool(ok), detail, None);
                }
                CandidateKind::IntegralSymmetry => {
                    // Image is -I u∂_u; I u∂_u itself must pass the forward check too.
                    let (ok, detail) = match kbe_to_kfe(s, x, &c.name, cfg) {
                        Ok(rec) => {
                            let neg = x.scale(&Expr::int(-1));
                            let (same, d) = same_field(&rec.target, &neg, ctx, cfg).map_err(|e| self.fail(e))?;
                            let kfe = s.kfe().map_err(|e| self.fail(e))?;
                            let itself = check_kfe_symmetry(&kfe, x, &c.name, cfg).map_err(|e| self.fail(e))?;
                            (
                                same && itself.passed(),
                                format!("image {}{d}; field itself {}", rec.target.display(ctx), itself.verdict),
                            )
                        }
                        Err(e) => (false, e.to_string()),
                    };
                    self.push(Section::Corollary, c.key(), Verdict::Pass, Verdict::from_bool(ok), detail, None);
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn bracket(&mut self, b: &BracketSpec) -> Result<(), CorpusError> {
        let ctx = self.problem.system.ctx();
        let x = self.field_of(&b.left)?.clone();
        let y = self.field_of(&b.right)?.clone();
        let mut basis = FieldBasis::new();
        for k in &b.basis {
            basis.push(k, self.field_of(k)?.clone());
        }
        let br = lie_bracket(&x, &y, ctx).map_err(|e| self.fail(e))?;
        let subject = format!("[{}, {}]", b.left, b.right);
        let span = span_membership(&br, &basis, ctx, self.cfg).map_err(|e| self.fail(e))?;
        let names: Vec<&str> = b.basis.iter().map(String::as_str).collect();
        let (ok, detail) = match span {
            SpanResult::InSpan {
                coefficients,
                residual,
                certified,
            } => {
                let mut ok = certified && residual < self.cfg.tol.max(1e-9);
                for (got, want) in coefficients.iter().zip(&b.coefficients) {
                    let want = parse(want, ctx).map_err(|e| self.fail(e))?;
                    let v = is_zero(&(got - &want), ctx, self.cfg).map_err(|e| self.fail(e))?;
                    ok &= v.is_zero();
                }
                let combo = crate::fields::format_combination(&names, &coefficients);
                (ok, format!("= {combo} (residual {residual:.1e}, certified {certified})"))
            }
            SpanResult::NotInSpan { residual } => (false, format!("not in span (residual {residual:.1e})")),
        };
        self.push(Section::Bracket, subject, Verdict::Pass, Verdict::from_bool(ok), detail, None);
        Ok(())
    }
}

fn same_field(
    a: &VectorField,
    b: &VectorField,
    ctx: &crate::expr::Context,
    cfg: &SamplingConfig,
) -> Result<(bool, String), FieldError> {
    Ok(match equals_mod_x0(a, b, ctx, cfg)? {
        ModX0::Equal { c } if c == Rational::from_integer(0.into()) => (true, String::new()),
        ModX0::Equal { c } => (false, format!("; off by {c}*u*d_u")),
        ModX0::Mismatch { component } => (false, format!("; differs in {component}")),
    })
}

fn failure_detail(rep: &CheckReport) -> String {
    let bad: Vec<String> = rep
        .residuals
        .iter()
        .filter(|r| !r.verdict.is_zero())
        .map(|r| match &r.parameter_factor {
            Some(p) => format!("{} = ({p})*(...)", r.label),
            None => format!("{} = {}", r.label, r.residual),
        })
        .collect();
    bad.join("; ")
}

// --- case definitions -------------------------------------------------------

use CandidateKind::{ConverseIntegral, ConverseSde, FirstIntegral, IntegralSymmetry, Kbe, Kfe, Sde};
use Verdict::{Fail, Pass};

fn field(kind: CandidateKind, name: &str, tau: &str, xi: &[&str]) -> CandidateSpec {
    CandidateSpec::field(kind, name, tau, xi)
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn scalar(name: &str, params: Vec<crate::problem::ParamSpec>, drift: &str, diffusion: &str) -> ProblemFile {
    ProblemFile {
        name: Some(name.to_string()),
        states: strings(&["x"]),
        wiener: 1,
        params,
        atoms: Vec::new(),
        drift: strings(&[drift]),
        diffusion: vec![strings(&[diffusion])],
        candidates: Vec::new(),
        sampling: None,
    }
}

fn nonzero(name: &str) -> crate::problem::ParamSpec {
    crate::problem::ParamSpec::Decl {
        name: name.to_string(),
        nonzero: true,
        range: None,
    }
}

fn plain(name: &str) -> crate::problem::ParamSpec {
    crate::problem::ParamSpec::Name(name.to_string())
}

fn matches(rule: TransferRule, source: &str, listed: &str, offset: i64) -> TransferSpec {
    TransferSpec {
        rule,
        source: source.to_string(),
        expect: TransferExpect::Matches {
            listed: listed.to_string(),
            offset: Rational::from_integer(offset.into()),
        },
    }
}

fn verified(rule: TransferRule, source: &str) -> TransferSpec {
    TransferSpec {
        rule,
        source: source.to_string(),
        expect: TransferExpect::Verified,
    }
}

fn refused(rule: TransferRule, source: &str) -> TransferSpec {
    TransferSpec {
        rule,
        source: source.to_string(),
        expect: TransferExpect::Refused,
    }
}

fn bracket(left: &str, right: &str, basis: &[&str], coefficients: &[&str]) -> BracketSpec {
    BracketSpec {
        left: left.to_string(),
        right: right.to_string(),
        basis: strings(basis),
        coefficients: strings(coefficients),
    }
}

/// `dx = dW`.
fn heat() -> CatalogCase {
    let mut p = scalar("heat", vec![], "0", "1");
    p.candidates = vec![
        field(Sde, "X1", "1", &["0"]).expect(Pass),
        field(Sde, "X2", "2*t", &["x"]).expect(Pass),
        field(Sde, "X3", "0", &["1"]).expect(Pass),
        field(Sde, "x*d_x", "0", &["x"])
            .expect(Fail)
            .note("negative: dilation of x alone, without 2t*d_t"),
        field(Kbe, "X0", "0", &["0"]).multiplier("1").expect(Pass),
        field(Kbe, "X1", "1", &["0"]).multiplier("0").expect(Pass),
        field(Kbe, "X2", "2*t", &["x"]).multiplier("0").expect(Pass),
        field(Kbe, "X3", "0", &["1"]).multiplier("0").expect(Pass),
        field(Kbe, "Y1", "0", &["t"]).multiplier("x").expect(Pass),
        field(Kbe, "Y2", "2*t^2", &["2*t*x"]).multiplier("x^2 - t").expect(Pass),
        field(Kbe, "Y1-flipped", "0", &["t"])
            .multiplier("-x")
            .expect(Fail)
            .note("negative: Y1 with the multiplier sign flipped"),
        field(Kbe, "Y2-dropped", "2*t^2", &["2*t*x"])
            .multiplier("x^2")
            .expect(Fail)
            .note("negative: Y2 without the -t term of the multiplier"),
        CandidateSpec::solution("psi=x", "x", 1).expect(Pass),
        CandidateSpec::solution("psi=x^2-t", "x^2 - t", 1).expect(Pass),
        CandidateSpec::solution("psi=x^2", "x^2", 1)
            .expect(Fail)
            .note("negative: not a solution"),
    ];
    CatalogCase {
        name: "heat",
        tags: &["scalar", "sde", "kbe", "kfe", "three-symmetries"],
        summary: "dx = dW: three SDE symmetries plus two extra backward-equation symmetries",
        problem: p,
        subcases: vec![],
        transfers: vec![
            verified(TransferRule::SdeToKbe, "sde:X2"),
            matches(TransferRule::SdeToKfe, "sde:X3", "kbe:X3", 0),
            refused(TransferRule::SdeToKbe, "sde:x*d_x"),
        ],
        brackets: vec![
            bracket("sde:X1", "sde:X3", &["sde:X1", "sde:X2", "sde:X3"], &["0", "0", "0"]),
            bracket("sde:X1", "sde:X2", &["sde:X1", "sde:X2", "sde:X3"], &["2", "0", "0"]),
            bracket("sde:X2", "sde:X3", &["sde:X1", "sde:X2", "sde:X3"], &["0", "0", "-1"]),
            bracket("sde:X2", "sde:X2", &["sde:X1", "sde:X2", "sde:X3"], &["0", "0", "0"]),
        ],
    }
}

fn drift_ax_candidates(p: &mut ProblemFile, generic: bool) {
    let y23 = if generic { Fail } else { Pass };
    p.candidates = vec![
        field(Sde, "X1", "1", &["0"]).expect(Pass),
        field(Sde, "X2", "2*t", &["x"]).expect(Pass),
        field(Sde, "d_x", "0", &["1"])
            .expect(Fail)
            .note("negative: translation is not admitted"),
        field(Kbe, "X1", "1", &["0"]).multiplier("0").expect(Pass),
        field(Kbe, "X2", "2*t", &["x"]).multiplier("0").expect(Pass),
        field(Kbe, "Y2", "0", &["t"]).multiplier("x - t/x").expect(y23),
        field(Kbe, "Y3", "0", &["1"]).multiplier("-1/x").expect(y23),
    ];
    let y1 = if generic { "x^2 - (1 + 2*A)*t" } else { "x^2 - 3*t" };
    p.candidates
        .insert(5, field(Kbe, "Y1", "2*t^2", &["2*t*x"]).multiplier(y1).expect(Pass));
}

/// `dx = (A/x) dt + dW`, generic `A` and the subcase `A = 1`.
fn drift_ax() -> CatalogCase {
    let mut p = scalar("driftAx", vec![nonzero("A")], "A/x", "1");
    drift_ax_candidates(&mut p, true);
    let mut sub = scalar("driftAx/A=1", vec![], "1/x", "1");
    drift_ax_candidates(&mut sub, false);
    CatalogCase {
        name: "driftAx",
        tags: &["scalar", "sde", "kbe", "two-symmetries", "subcases"],
        summary: "dx = (A/x) dt + dW: two SDE symmetries; Y2 and Y3 only when A = 1",
        problem: p,
        subcases: vec![Subcase {
            name: "A=1".into(),
            problem: sub,
        }],
        transfers: vec![
            verified(TransferRule::SdeToKbe, "sde:X2"),
            verified(TransferRule::KbeToKfe, "kbe:Y1"),
            refused(TransferRule::KbeToKfe, "kbe:Y3"),
        ],
        brackets: vec![bracket("sde:X1", "sde:X2", &["sde:X1", "sde:X2"], &["2", "0"])],
    }
}

/// `dx = F(x) dt + dW` with `F` unknown.
fn autonomous() -> CatalogCase {
    let mut p = scalar("autonomous", vec![], "F(x)", "1");
    p.atoms = vec![crate::problem::AtomSpec {
        name: "F".into(),
        args: strings(&["x"]),
        rule: None,
    }];
    p.candidates = vec![
        field(Sde, "X1", "1", &["0"]).expect(Pass),
        field(Sde, "d_x", "0", &["1"])
            .expect(Fail)
            .note("negative: translation needs F' = 0"),
        field(Kbe, "X1", "1", &["0"]).multiplier("0").expect(Pass),
        field(Kbe, "d_x", "0", &["1"]).multiplier("0").expect(Fail),
    ];
    CatalogCase {
        name: "autonomous",
        tags: &["scalar", "sde", "kbe", "one-symmetry", "atoms"],
        summary: "dx = F(x) dt + dW: time translation only",
        problem: p,
        subcases: vec![],
        transfers: vec![verified(TransferRule::SdeToKfe, "sde:X1")],
        brackets: vec![],
    }
}

const GBM_X2_XI: &str = "(alpha - sigma^2/2)*t*x + x*ln(x)";
const GBM_Y1_KBE: &str = "-(1/sigma^2)*((alpha - sigma^2/2)*t - ln(x))";
const GBM_Y2_KBE: &str = "(1/sigma^2)*((alpha - sigma^2/2)*t - ln(x))^2 - t";
const GBM_Y1_KFE: &str = "(1/sigma^2)*((alpha - sigma^2/2)*t - ln(x)) - t";
const GBM_Y2_KFE: &str = "-((1/sigma^2)*((alpha - sigma^2/2)*t - ln(x))^2 + 2*t*ln(x) + t)";

/// Geometric Brownian motion `dx = αx dt + σx dW`.
fn gbm() -> CatalogCase {
    let mut p = scalar("gbm", vec![plain("alpha"), nonzero("sigma")], "alpha*x", "sigma*x");
    p.candidates = vec![
        field(Sde, "X1", "1", &["0"]).expect(Pass),
        field(Sde, "X2", "2*t", &[GBM_X2_XI]).expect(Pass),
        field(Sde, "X3", "0", &["x"]).expect(Pass),
        field(Sde, "X2-dropped", "2*t", &["x*ln(x)"])
            .expect(Fail)
            .note("negative: X2 without the (alpha - sigma^2/2)*t*x term"),
        field(Kbe, "X0", "0", &["0"]).multiplier("1").expect(Pass),
        field(Kbe, "X1", "1", &["0"]).multiplier("0").expect(Pass),
        field(Kbe, "X2", "2*t", &[GBM_X2_XI]).multiplier("0").expect(Pass),
        field(Kbe, "X3", "0", &["x"]).multiplier("0").expect(Pass),
        field(Kbe, "Y1", "0", &["t*x"]).multiplier(GBM_Y1_KBE).expect(Pass),
        field(Kbe, "Y2", "2*t^2", &["2*t*x*ln(x)"]).multiplier(GBM_Y2_KBE).expect(Pass),
        field(Kbe, "Y1-flipped", "0", &["t*x"])
            .multiplier("(1/sigma^2)*((alpha - sigma^2/2)*t - ln(x))")
            .expect(Fail)
            .note("negative: Y1 with the multiplier sign flipped"),
        field(Kfe, "X1", "1", &["0"]).multiplier("0").expect(Pass),
        field(Kfe, "X2", "2*t", &[GBM_X2_XI])
            .multiplier("-((alpha - sigma^2/2)*t + ln(x))")
            .expect(Pass),
        field(Kfe, "X3", "0", &["x"]).multiplier("0").expect(Pass),
        field(Kfe, "Y1", "0", &["t*x"]).multiplier(GBM_Y1_KFE).expect(Pass),
        field(Kfe, "Y2", "2*t^2", &["2*t*x*ln(x)"]).multiplier(GBM_Y2_KFE).expect(Pass),
        field(Kfe, "Y1-backward", "0", &["t*x"])
            .multiplier(GBM_Y1_KBE)
            .expect(Fail)
            .note("negative: backward multiplier used on the forward equation"),
        CandidateSpec::function(FirstIntegral, "x", "x").expect(Fail),
        CandidateSpec::function(FirstIntegral, "ln(x)", "ln(x)").expect(Fail),
    ];
    let basis = ["sde:X1", "sde:X2", "sde:X3"];
    CatalogCase {
        name: "gbm",
        tags: &["scalar", "sde", "kbe", "kfe", "transfers", "brackets"],
        summary: "dx = alpha*x dt + sigma*x dW: full transfer and bracket suite",
        problem: p,
        subcases: vec![],
        transfers: vec![
            matches(TransferRule::SdeToKbe, "sde:X1", "kbe:X1", 0),
            matches(TransferRule::SdeToKbe, "sde:X2", "kbe:X2", 0),
            matches(TransferRule::SdeToKbe, "sde:X3", "kbe:X3", 0),
            matches(TransferRule::KbeToKfe, "kbe:Y1", "kfe:Y1", 0),
            matches(TransferRule::KbeToKfe, "kbe:Y2", "kfe:Y2", 0),
            matches(TransferRule::KbeToKfe, "kbe:X0", "kbe:X0", -2),
            matches(TransferRule::SdeToKfe, "sde:X1", "kfe:X1", 0),
            matches(TransferRule::SdeToKfe, "sde:X2", "kfe:X2", -1),
            matches(TransferRule::SdeToKfe, "sde:X3", "kfe:X3", -1),
            matches(TransferRule::KfeToKbe, "kfe:X2", "kbe:X2", -1),
            matches(TransferRule::KfeToKbe, "kfe:Y1", "kbe:Y1", 0),
            refused(TransferRule::SdeToKbe, "sde:X2-dropped"),
            refused(TransferRule::KbeToKfe, "kbe:Y1-flipped"),
            refused(TransferRule::KfeToKbe, "kfe:Y1-backward"),
            refused(TransferRule::IntegralToKbe, "first-integral:ln(x)"),
        ],
        brackets: vec![
            bracket("sde:X1", "sde:X2", &basis, &["2", "0", "alpha - sigma^2/2"]),
            bracket("sde:X1", "sde:X3", &basis, &["0", "0", "0"]),
            bracket("sde:X2", "sde:X3", &basis, &["0", "0", "-1"]),
        ],
    }
}

/// `dx = -2k'(x) dt + √2 dW` with `k'' = (k')² + λ/x²`; `kp` stands for `k'`.
fn kfamily() -> CatalogCase {
    let mut p = scalar("kfamily", vec![nonzero("lambda")], "-2*kp(x)", "sqrt(2)");
    p.atoms = vec![crate::problem::AtomSpec {
        name: "kp".into(),
        args: strings(&["x"]),
        rule: Some("kp(x)^2 + lambda/x^2".into()),
    }];
    p.candidates = vec![
        field(Sde, "X1", "1", &["0"]).expect(Pass),
        field(Kbe, "X1", "1", &["0"]).multiplier("0").expect(Pass),
        field(Kbe, "X2", "2*t", &["x"]).multiplier("x*kp(x)").expect(Pass),
        field(Kbe, "X3", "4*t^2", &["4*t*x"])
            .multiplier("x^2 - 2*t + 4*t*x*kp(x)")
            .expect(Pass)
            .note("listed X3 with the -2t term the determining equations require"),
        field(Kbe, "X3-as-printed", "4*t^2", &["4*t*x"])
            .multiplier("x^2 + 4*t*x*kp(x)")
            .expect(Fail)
            .note("multiplier exactly as printed; the constant residual 2 shows the missing -2t"),
        field(Kfe, "X1", "1", &["0"]).multiplier("0").expect(Pass),
        field(Kfe, "X2", "2*t", &["x"]).multiplier("-x*kp(x)").expect(Pass),
        field(Kfe, "X3", "4*t^2", &["4*t*x"])
            .multiplier("-(x^2 + 2*t + 4*t*x*kp(x))")
            .expect(Pass)
            .note("listed X3 with 2t in place of 4t, as the determining equations require"),
        field(Kfe, "X3-as-printed", "4*t^2", &["4*t*x"])
            .multiplier("-(x^2 + 4*t + 4*t*x*kp(x))")
            .expect(Fail)
            .note("multiplier exactly as printed"),
        field(ConverseSde, "X2", "2*t", &["x"])
            .expect(Fail)
            .note("X2 is not induced by an SDE symmetry for generic k'"),
    ];
    CatalogCase {
        name: "kfamily",
        tags: &["scalar", "kbe", "kfe", "atoms", "three-symmetries"],
        summary: "-u_t = -2k'(x)u_x + u_xx under k'' = (k')^2 + lambda/x^2",
        problem: p,
        subcases: vec![],
        transfers: vec![
            matches(TransferRule::KbeToKfe, "kbe:X2", "kfe:X2", -1),
            matches(TransferRule::KbeToKfe, "kbe:X3", "kfe:X3", 0),
            matches(TransferRule::KfeToKbe, "kfe:X3", "kbe:X3", 0),
            refused(TransferRule::KbeToKfe, "kbe:X3-as-printed"),
        ],
        brackets: vec![],
    }
}

/// `dx1 = dW, dx2 = dW` sharing one Wiener channel.
fn integral2d() -> CatalogCase {
    let p = ProblemFile {
        name: Some("integral2d".into()),
        states: strings(&["x1", "x2"]),
        wiener: 1,
        params: vec![],
        atoms: vec![],
        drift: strings(&["0", "0"]),
        diffusion: vec![strings(&["1"]), strings(&["1"])],
        candidates: vec![
            CandidateSpec::function(FirstIntegral, "I", "x1 - x2").expect(Pass),
            CandidateSpec::function(FirstIntegral, "x1+x2", "x1 + x2")
                .expect(Fail)
                .note("negative: sign of x2 flipped"),
            CandidateSpec::function(FirstIntegral, "t", "t").expect(Fail),
            CandidateSpec::function(IntegralSymmetry, "I", "x1 - x2").expect(Pass),
            CandidateSpec::function(ConverseIntegral, "I", "x1 - x2").expect(Pass),
            CandidateSpec::function(ConverseIntegral, "x1+x2", "x1 + x2").expect(Fail),
            field(Sde, "X1", "1", &["0", "0"]).expect(Pass),
            field(Sde, "shift", "0", &["1", "1"]).expect(Pass),
            field(Kbe, "X1", "1", &["0", "0"]).multiplier("0").expect(Pass),
            field(Kbe, "I*X0", "0", &["0", "0"]).multiplier("x1 - x2").expect(Pass),
        ],
        sampling: None,
    };
    CatalogCase {
        name: "integral2d",
        tags: &["system", "first-integrals", "kbe", "kfe", "rank-deficient"],
        summary: "two states driven by one Wiener process; first integral x1 - x2",
        problem: p,
        subcases: vec![],
        transfers: vec![
            matches(TransferRule::IntegralToKbe, "first-integral:I", "kbe:I*X0", 0),
            refused(TransferRule::IntegralToKbe, "first-integral:t"),
        ],
        brackets: vec![],
    }
}

/// `dx = F(t, x) dt + dW` with `F` unknown: no symmetries.
fn generic_negative() -> CatalogCase {
    let mut p = scalar("generic-negative", vec![], "F(t, x)", "1");
    p.atoms = vec![crate::problem::AtomSpec {
        name: "F".into(),
        args: strings(&["t", "x"]),
        rule: None,
    }];
    p.candidates = vec![
        field(Sde, "X1", "1", &["0"]).expect(Fail),
        field(Kbe, "X1", "1", &["0"]).multiplier("0").expect(Fail),
        field(Sde, "d_x", "0", &["1"]).expect(Fail),
    ];
    CatalogCase {
        name: "generic-negative",
        tags: &["scalar", "sde", "negative", "atoms"],
        summary: "dx = F(t,x) dt + dW: time translation fails",
        problem: p,
        subcases: vec![],
        transfers: vec![refused(TransferRule::SdeToKfe, "sde:X1")],
        brackets: vec![],
    }
}
