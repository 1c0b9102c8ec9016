//! Determining-equation residuals and verdicts for every symmetry type.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::expr::canon::{canonical, RatFunc};
use crate::expr::poly::GenKind;
use crate::expr::{is_zero, Context, Expr, ExprError, Mode, SamplingConfig, Witness, ZeroError, ZeroVerdict};
use crate::fields::{FieldError, VectorField};
use crate::model::{EquationKind, KolmogorovEquation, ModelError, SdeSystem};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CheckError {
    #[error("expected a {expected:?} equation, got {got:?}")]
    KindMismatch { expected: EquationKind, got: EquationKind },
    #[error("candidate form: {0}")]
    CandidateForm(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Zero(#[from] ZeroError),
}

impl From<ExprError> for CheckError {
    fn from(e: ExprError) -> Self {
        CheckError::Zero(ZeroError::Expr(e))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Sde,
    Kbe,
    Kfe,
    IntegralSymmetry,
    FirstIntegral,
    Trivial,
    ConverseSde,
    ConverseIntegral,
    JetOracle,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Sde => "sde",
            CheckKind::Kbe => "kbe",
            CheckKind::Kfe => "kfe",
            CheckKind::IntegralSymmetry => "integral-symmetry",
            CheckKind::FirstIntegral => "first-integral",
            CheckKind::Trivial => "trivial",
            CheckKind::ConverseSde => "converse-sde",
            CheckKind::ConverseIntegral => "converse-integral",
            CheckKind::JetOracle => "jet-oracle",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    #[serde(alias = "pass")]
    Pass,
    #[serde(alias = "fail")]
    Fail,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Verdict {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub label: String,
    pub residual: Expr,
    pub verdict: ZeroVerdict,
    /// Parameter-only factor of a nonzero residual, e.g. `A - 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter_factor: Option<Expr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cofactor: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub kind: CheckKind,
    pub candidate: String,
    pub verdict: Verdict,
    pub residuals: Vec<ResidualEntry>,
    /// Nonzero assumptions on parameters that the symbolic stage divided by.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub side_conditions: Vec<String>,
    /// The Q-function of a forward-equation check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Expr>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn residual(&self, label: &str) -> Option<&ResidualEntry> {
        self.residuals.iter().find(|r| r.label == label)
    }

    pub fn witnesses(&self) -> Vec<(&str, &Witness)> {
        self.residuals
            .iter()
            .filter_map(|r| r.verdict.witness().map(|w| (r.label.as_str(), w)))
            .collect()
    }

    /// True when every residual whose label starts with `prefix` vanishes.
    pub fn group_passed(&self, prefix: &str) -> bool {
        self.residuals
            .iter()
            .filter(|r| r.label.starts_with(prefix))
            .all(|r| r.verdict.is_zero())
    }

    pub fn all_symbolic(&self) -> bool {
        self.residuals
            .iter()
            .all(|r| r.verdict == ZeroVerdict::ZeroSymbolic)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}] {} {}", self.verdict, self.kind.name(), self.candidate)?;
        let width = self.residuals.iter().map(|r| r.label.len()).max().unwrap_or(0);
        for r in &self.residuals {
            writeln!(f, "  {:<width$}  {:<13}  {}", r.label, r.verdict.label(), r.residual)?;
            if let (Some(p), Some(c)) = (&r.parameter_factor, &r.cofactor) {
                writeln!(f, "  {:<width$}  {:<13}  = ({p}) * ({c})", "", "")?;
            }
            if let Some(w) = r.verdict.witness() {
                let pt: Vec<String> = w.point.iter().map(|(k, v)| format!("{k}={v}")).collect();
                if pt.is_empty() {
                    writeln!(f, "  {:<width$}  {:<13}  value {:e}", "", "", w.value)?;
                } else {
                    writeln!(f, "  {:<width$}  {:<13}  at {} value {:e}", "", "", pt.join(", "), w.value)?;
                }
            }
        }
        if let Some(q) = &self.q {
            writeln!(f, "  Q = {q}")?;
        }
        for s in &self.side_conditions {
            writeln!(f, "  assuming {s}")?;
        }
        Ok(())
    }
}

/// Accumulates residuals and decides them under one sampling configuration.
pub struct ReportBuilder<'a> {
    kind: CheckKind,
    candidate: String,
    ctx: &'a Context,
    cfg: &'a SamplingConfig,
    residuals: Vec<ResidualEntry>,
    side: BTreeSet<String>,
    q: Option<Expr>,
}

impl<'a> ReportBuilder<'a> {
    pub fn new(kind: CheckKind, candidate: &str, ctx: &'a Context, cfg: &'a SamplingConfig) -> Self {
        ReportBuilder {
            kind,
            candidate: candidate.to_string(),
            ctx,
            cfg,
            residuals: Vec::new(),
            side: BTreeSet::new(),
            q: None,
        }
    }

    /// Normalizes `raw`, decides it, and records the entry.
    pub fn residual(&mut self, label: &str, raw: Expr) -> Result<(), ZeroError> {
        let rf = canonical(&raw)?;
        let normalized = rf.to_expr();
        let verdict = if self.cfg.mode != Mode::Numeric && rf.is_zero() {
            ZeroVerdict::ZeroSymbolic
        } else if self.cfg.mode == Mode::Numeric {
            is_zero(&raw, self.ctx, self.cfg)?
        } else {
            is_zero(&normalized, self.ctx, self.cfg)?
        };
        let (parameter_factor, cofactor) = if rf.is_zero() {
            (None, None)
        } else {
            match rf.parameter_factor(&self.ctx.param_names()) {
                Some((f, c)) => (Some(RatFunc::from_poly(f).to_expr()), Some(c.to_expr())),
                None => (None, None),
            }
        };
        self.residuals.push(ResidualEntry {
            label: label.to_string(),
            residual: normalized,
            verdict,
            parameter_factor,
            cofactor,
        });
        Ok(())
    }

    /// Records parameter factors of the denominators of `inputs` as side conditions.
    pub fn note_divisions<'e>(&mut self, inputs: impl IntoIterator<Item = &'e Expr>) {
        let params = self.ctx.param_names();
        for e in inputs {
            let Ok(rf) = canonical(e) else { continue };
            if rf.denom().as_constant().is_some() {
                continue;
            }
            let den = RatFunc::from_poly(rf.denom().clone());
            let Some((factor, _)) = den.parameter_factor(&params) else {
                continue;
            };
            if factor.len() == 1 {
                let (m, _) = factor.terms().next().expect("one term");
                for (g, _) in m.factors() {
                    if let GenKind::Sym(p) = g.kind() {
                        self.side.insert(self.describe(p, &format!("{p} != 0")));
                    }
                }
            } else {
                let text = format!("{} != 0", RatFunc::from_poly(factor).to_expr());
                self.side.insert(format!("{text} (assumed)"));
            }
        }
    }

    fn describe(&self, param: &str, text: &str) -> String {
        let declared = self.ctx.param(param).is_some_and(|p| p.nonzero);
        format!("{text} ({})", if declared { "declared" } else { "assumed" })
    }

    pub fn set_q(&mut self, q: Expr) {
        self.q = Some(q);
    }

    /// Appends another report's residuals with a label prefix.
    pub fn absorb(&mut self, prefix: &str, other: CheckReport) {
        for mut r in other.residuals {
            r.label = format!("{prefix}{}", r.label);
            self.residuals.push(r);
        }
        self.side.extend(other.side_conditions);
        if self.q.is_none() {
            self.q = other.q;
        }
    }

    pub fn finish(self) -> CheckReport {
        let verdict = if self.residuals.iter().all(|r| r.verdict.is_zero()) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        CheckReport {
            kind: self.kind,
            candidate: self.candidate,
            verdict,
            residuals: self.residuals,
            side_conditions: self.side.into_iter().collect(),
            q: self.q,
        }
    }
}

/// `Q = χ + ξ_{i,i} + τ_t - D₀τ`; `offset` is `ξ_{i,i} + τ_t - D₀τ`.
#[derive(Clone, Debug, PartialEq)]
pub struct QFunction {
    pub q: Expr,
    pub offset: Expr,
}

impl QFunction {
    pub fn new(s: &SdeSystem, x: &VectorField) -> Result<QFunction, CheckError> {
        let offset = transfer_offset(s, x)?;
        let q = (x.multiplier_or_zero() - offset.clone()).normalize()?;
        Ok(QFunction {
            q,
            offset: (-offset).normalize()?,
        })
    }

    /// Recovers χ from Q.
    pub fn chi(&self) -> Result<Expr, ExprError> {
        (&self.q - &self.offset).normalize()
    }
}

/// `D₀τ - τ_t - ξ_{i,i}`, the quantity `φ + χ` shared by matching backward and
/// forward symmetries; normalized.
pub fn transfer_offset(s: &SdeSystem, x: &VectorField) -> Result<Expr, CheckError> {
    let ctx = s.ctx();
    let mut terms = vec![s.d0_raw(&x.tau)?, -x.tau.differentiate(ctx.time(), ctx)?];
    for (xi, xv) in x.xi.iter().zip(ctx.states()) {
        terms.push(-xi.differentiate(xv, ctx)?);
    }
    Ok(Expr::add_all(terms).normalize()?)
}

struct Pieces {
    /// `D₀ξ_i - X(f_i) - f_iD₀τ`.
    drift: Vec<Expr>,
    /// `D_αξ_i - X(g_iα) - ½g_iαD₀τ`, indexed `[i][α]`.
    diffusion: Vec<Vec<Expr>>,
    /// `D_ατ`.
    time: Vec<Expr>,
}

fn pieces(s: &SdeSystem, x: &VectorField) -> Result<Pieces, CheckError> {
    x.check_scope(s.ctx())?;
    let ctx = s.ctx();
    let d0_tau = s.d0(&x.tau)?;
    let half = Expr::frac(1, 2);
    let mut drift = Vec::with_capacity(s.n());
    let mut diffusion = Vec::with_capacity(s.n());
    for i in 0..s.n() {
        let f = &s.drift()[i];
        drift.push(s.d0_raw(&x.xi[i])? - x.apply(f, ctx)? - f * &d0_tau);
        let mut row = Vec::with_capacity(s.m());
        for a in 0..s.m() {
            let g = &s.diffusion()[i][a];
            row.push(s.dalpha_raw(&x.xi[i], a)? - x.apply(g, ctx)? - &half * &(g * &d0_tau));
        }
        diffusion.push(row);
    }
    let time = (0..s.m())
        .map(|a| s.dalpha_raw(&x.tau, a))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Pieces {
        drift,
        diffusion,
        time,
    })
}

fn note_system(b: &mut ReportBuilder<'_>, s: &SdeSystem, x: &VectorField) {
    let comps = x.components();
    b.note_divisions(comps.iter().chain(s.drift()).chain(s.diffusion().iter().flatten()));
}

/// SDE determining equations: `drift[i]`, `diffusion[i,a]`, `time[a]` (1-based).
pub fn check_sde_symmetry(s: &SdeSystem, x: &VectorField, name: &str, cfg: &SamplingConfig) -> Result<CheckReport, CheckError> {
    if x.has_u_part() {
        return Err(CheckError::CandidateForm("an SDE symmetry has no u-component".into()));
    }
    let p = pieces(s, x)?;
    let mut b = ReportBuilder::new(CheckKind::Sde, name, s.ctx(), cfg);
    sde_residuals(&mut b, &p, true)?;
    note_system(&mut b, s, x);
    Ok(b.finish())
}

fn sde_residuals(b: &mut ReportBuilder<'_>, p: &Pieces, with_drift: bool) -> Result<(), ZeroError> {
    if with_drift {
        for (i, d) in p.drift.iter().enumerate() {
            b.residual(&format!("drift[{}]", i + 1), d.clone())?;
        }
    }
    for (i, row) in p.diffusion.iter().enumerate() {
        for (a, d) in row.iter().enumerate() {
            b.residual(&format!("diffusion[{},{}]", i + 1, a + 1), d.clone())?;
        }
    }
    for (a, d) in p.time.iter().enumerate() {
        b.residual(&format!("time[{}]", a + 1), d.clone())?;
    }
    Ok(())
}

fn shared_kolmogorov(b: &mut ReportBuilder<'_>, s: &SdeSystem, p: &Pieces) -> Result<(), ZeroError> {
    let g = s.diffusion();
    for (i, row) in g.iter().enumerate() {
        let e = Expr::add_all(row.iter().zip(&p.time).map(|(gia, ta)| gia * ta));
        b.residual(&format!("time[{}]", i + 1), e)?;
    }
    for i in 0..s.n() {
        for j in i..s.n() {
            let e = Expr::add_all(
                (0..s.m()).map(|a| &g[i][a] * &p.diffusion[j][a] + &g[j][a] * &p.diffusion[i][a]),
            );
            b.residual(&format!("diffusion[{},{}]", i + 1, j + 1), e)?;
        }
    }
    Ok(())
}

fn require(e: &KolmogorovEquation, kind: EquationKind) -> Result<(), CheckError> {
    if e.kind() != kind {
        return Err(CheckError::KindMismatch {
            expected: kind,
            got: e.kind(),
        });
    }
    Ok(())
}

fn no_shift(x: &VectorField) -> Result<(), CheckError> {
    if x.shift.as_ref().is_some_and(|s| !s.is_literal_zero()) {
        return Err(CheckError::CandidateForm(
            "u-shift fields are checked with the trivial-symmetry check".into(),
        ));
    }
    Ok(())
}

/// Backward-equation conditions: `time[i]`, `diffusion[i,j]` (i ≤ j), `drift[i]`, `multiplier`.
pub fn check_kbe_symmetry(
    e: &KolmogorovEquation,
    x: &VectorField,
    name: &str,
    cfg: &SamplingConfig,
) -> Result<CheckReport, CheckError> {
    kbe_report(e, x, name, cfg, CheckKind::Kbe)
}

fn kbe_report(
    e: &KolmogorovEquation,
    x: &VectorField,
    name: &str,
    cfg: &SamplingConfig,
    kind: CheckKind,
) -> Result<CheckReport, CheckError> {
    require(e, EquationKind::Backward)?;
    no_shift(x)?;
    let s = e.system();
    let p = pieces(s, x)?;
    let phi = x.multiplier_or_zero();
    let mut b = ReportBuilder::new(kind, name, s.ctx(), cfg);
    shared_kolmogorov(&mut b, s, &p)?;
    for i in 0..s.n() {
        let mut terms = vec![p.drift[i].clone()];
        for a in 0..s.m() {
            terms.push(-(&s.diffusion()[i][a] * &s.dalpha_raw(&phi, a)?));
        }
        b.residual(&format!("drift[{}]", i + 1), Expr::add_all(terms))?;
    }
    b.residual("multiplier", s.d0_raw(&phi)?)?;
    note_system(&mut b, s, x);
    Ok(b.finish())
}

/// Forward-equation conditions with `Q = χ + ξ_{i,i} + τ_t - D₀τ`:
/// `time[i]`, `diffusion[i,j]`, `drift[i]`, `q`.
pub fn check_kfe_symmetry(
    e: &KolmogorovEquation,
    x: &VectorField,
    name: &str,
    cfg: &SamplingConfig,
) -> Result<CheckReport, CheckError> {
    require(e, EquationKind::Forward)?;
    no_shift(x)?;
    let s = e.system();
    let p = pieces(s, x)?;
    let q = QFunction::new(s, x)?.q;
    let mut b = ReportBuilder::new(CheckKind::Kfe, name, s.ctx(), cfg);
    shared_kolmogorov(&mut b, s, &p)?;
    for i in 0..s.n() {
        let mut terms = vec![p.drift[i].clone()];
        for a in 0..s.m() {
            terms.push(&s.diffusion()[i][a] * &s.dalpha_raw(&q, a)?);
        }
        b.residual(&format!("drift[{}]", i + 1), Expr::add_all(terms))?;
    }
    b.residual("q", s.d0_raw(&q)?)?;
    note_system(&mut b, s, x);
    b.set_q(q);
    Ok(b.finish())
}

/// `I u∂_u` as a backward-equation symmetry.
pub fn check_integral_symmetry(
    e: &KolmogorovEquation,
    integral: &Expr,
    name: &str,
    cfg: &SamplingConfig,
) -> Result<CheckReport, CheckError> {
    let x = VectorField::zero(e.system().n()).with_multiplier(integral.clone());
    kbe_report(e, &x, name, cfg, CheckKind::IntegralSymmetry)
}

/// `ψ∂_u` is a symmetry iff ψ solves the equation; residual `solution`.
pub fn check_trivial_symmetry(
    e: &KolmogorovEquation,
    psi: &Expr,
    name: &str,
    cfg: &SamplingConfig,
) -> Result<CheckReport, CheckError> {
    let s = e.system();
    s.ctx().check_scope(psi).map_err(|m| CheckError::Field(FieldError::Scope(m)))?;
    let mut b = ReportBuilder::new(CheckKind::Trivial, name, s.ctx(), cfg);
    b.residual("solution", e.apply(psi)?)?;
    b.note_divisions([psi]);
    Ok(b.finish())
}

/// Backward-equation symmetry with φ = 0 (group `kbe:`) plus the diffusion
/// and time SDE conditions (group `sde:`).
pub fn converse_sde_from_kbe(s: &SdeSystem, x: &VectorField, name: &str, cfg: &SamplingConfig) -> Result<CheckReport, CheckError> {
    if x.has_u_part() {
        return Err(CheckError::CandidateForm("the converse check takes a field without u-component".into()));
    }
    let kbe = check_kbe_symmetry(&s.kbe(), x, name, cfg)?;
    let p = pieces(s, x)?;
    let mut extra = ReportBuilder::new(CheckKind::Sde, name, s.ctx(), cfg);
    sde_residuals(&mut extra, &p, false)?;
    let mut b = ReportBuilder::new(CheckKind::ConverseSde, name, s.ctx(), cfg);
    b.absorb("kbe:", kbe);
    b.absorb("sde:", extra.finish());
    Ok(b.finish())
}

/// Integral symmetry (group `kbe:`) plus `D_αI = 0` (group `sde:`).
pub fn converse_integral_from_kbe(
    s: &SdeSystem,
    integral: &Expr,
    name: &str,
    cfg: &SamplingConfig,
) -> Result<CheckReport, CheckError> {
    let kbe = check_integral_symmetry(&s.kbe(), integral, name, cfg)?;
    let mut extra = ReportBuilder::new(CheckKind::FirstIntegral, name, s.ctx(), cfg);
    for a in 0..s.m() {
        extra.residual(&format!("dW[{}]", a + 1), s.dalpha_raw(integral, a)?)?;
    }
    let mut b = ReportBuilder::new(CheckKind::ConverseIntegral, name, s.ctx(), cfg);
    b.absorb("kbe:", kbe);
    b.absorb("sde:", extra.finish());
    Ok(b.finish())
}

/// Whether a canonical residual is constant (used by diagnostics).
pub fn constant_value(e: &Expr) -> Option<crate::expr::Rational> {
    canonical(e).ok()?.as_constant().filter(|c| !c.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn gbm() -> SdeSystem {
        let ctx = Context::builder()
            .state("x")
            .param("alpha")
            .nonzero_param("sigma")
            .build()
            .unwrap();
        let f = parse("alpha*x", &ctx).unwrap();
        let g = parse("sigma*x", &ctx).unwrap();
        SdeSystem::new(ctx, vec![f], vec![vec![g]]).unwrap()
    }

    fn heat() -> SdeSystem {
        let ctx = Context::builder().state("x").build().unwrap();
        SdeSystem::new(ctx, vec![Expr::zero()], vec![vec![Expr::one()]]).unwrap()
    }

    fn field(s: &SdeSystem, tau: &str, xi: &str, m: Option<&str>) -> VectorField {
        let c = s.ctx();
        let f = VectorField::new(parse(tau, c).unwrap(), vec![parse(xi, c).unwrap()]);
        match m {
            Some(m) => f.with_multiplier(parse(m, c).unwrap()),
            None => f,
        }
    }

    #[test]
    fn gbm_x2_sde() {
        let s = gbm();
        let x2 = field(&s, "2*t", "(alpha - sigma^2/2)*t*x + x*ln(x)", None);
        let r = check_sde_symmetry(&s, &x2, "X2", &SamplingConfig::default()).unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.all_symbolic());
        assert_eq!(r.residuals.len(), 3);
    }

    #[test]
    fn heat_scaling_fails_on_diffusion() {
        let s = heat();
        let x = field(&s, "0", "x", None);
        let r = check_sde_symmetry(&s, &x, "xdx", &SamplingConfig::default()).unwrap();
        assert!(!r.passed());
        let d = r.residual("diffusion[1,1]").unwrap();
        assert_eq!(d.residual, Expr::one());
        assert!(d.verdict.witness().is_some());
    }

    #[test]
    fn gbm_y1_kbe_with_side_condition() {
        let s = gbm();
        let y1 = field(&s, "0", "t*x", Some("-((alpha - sigma^2/2)*t - ln(x))/sigma^2"));
        let r = check_kbe_symmetry(&s.kbe(), &y1, "Y1", &SamplingConfig::default()).unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.side_conditions.iter().any(|c| c.starts_with("sigma != 0")));
    }

    #[test]
    fn kfe_gbm_x3_and_q() {
        let s = gbm();
        let x3 = field(&s, "0", "x", Some("0"));
        let r = check_kfe_symmetry(&s.kfe().unwrap(), &x3, "X3", &SamplingConfig::default()).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.q, Some(Expr::one()));
        let q = QFunction::new(&s, &x3).unwrap();
        assert!(q.chi().unwrap().is_literal_zero());
    }

    #[test]
    fn kind_mismatch() {
        let s = gbm();
        let r = check_kfe_symmetry(&s.kbe(), &VectorField::zero(1), "z", &SamplingConfig::default());
        assert!(matches!(r, Err(CheckError::KindMismatch { .. })));
    }

    #[test]
    fn trivial_solutions() {
        let s = heat();
        let cfg = SamplingConfig::default();
        let kbe = s.kbe();
        for (psi, ok) in [("x", true), ("x^2 - t", true), ("x^2", false)] {
            let e = parse(psi, s.ctx()).unwrap();
            assert_eq!(check_trivial_symmetry(&kbe, &e, psi, &cfg).unwrap().passed(), ok, "{psi}");
        }
    }

    #[test]
    fn gbm_log_integral_fails_on_drift() {
        let s = gbm();
        let i = parse("ln(x) - (alpha - sigma^2/2)*t", s.ctx()).unwrap();
        let r = check_integral_symmetry(&s.kbe(), &i, "I", &SamplingConfig::default()).unwrap();
        assert!(!r.passed());
        assert!(r.residual("multiplier").unwrap().verdict.is_zero());
        let d = r.residual("drift[1]").unwrap();
        let expected = parse("-sigma^2*x", s.ctx()).unwrap();
        assert!((&d.residual - &expected).is_zero_canonical().unwrap(), "{}", d.residual);
    }
}
