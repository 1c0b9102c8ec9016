//! Problem files: a JSON description of an SDE plus candidate symmetries.
//!
//! ```json
//! {
//!   "states": ["x"],
//!   "wiener": 1,
//!   "params": ["alpha", {"name": "sigma", "nonzero": true}],
//!   "drift": ["alpha*x"],
//!   "diffusion": [["sigma*x"]],
//!   "candidates": [
//!     {"kind": "sde", "name": "X3", "tau": "0", "xi": ["x"], "expect": "pass"}
//!   ]
//! }
//! ```

use serde::{Deserialize, Serialize};

use crate::checks::{
    check_integral_symmetry, check_kbe_symmetry, check_kfe_symmetry, check_sde_symmetry, check_trivial_symmetry,
    converse_integral_from_kbe, converse_sde_from_kbe, CheckError, CheckReport, Verdict,
};
use crate::expr::{parse, Context, ContextError, Expr, ParamDecl, ParseError, SamplingConfig};
use crate::fields::VectorField;
use crate::model::{ModelError, SdeSystem};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("malformed problem file: {0}")]
    Json(String),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error("{place}: {source}")]
    Parse {
        place: String,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("candidate `{name}`: {message}")]
    Candidate { name: String, message: String },
    #[error("no candidate matches `{0}`")]
    UnknownCandidate(String),
    #[error("`{0}` matches several candidates; qualify it as kind:name")]
    Ambiguous(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamSpec {
    Name(String),
    Decl {
        name: String,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        nonzero: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        range: Option<(f64, f64)>,
    },
}

impl ParamSpec {
    pub fn name(&self) -> &str {
        match self {
            ParamSpec::Name(n) | ParamSpec::Decl { name: n, .. } => n,
        }
    }

    fn decl(&self) -> ParamDecl {
        match self {
            ParamSpec::Name(n) => ParamDecl::new(n),
            ParamSpec::Decl { name, nonzero, range } => ParamDecl {
                name: name.clone(),
                nonzero: *nonzero,
                range: *range,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub name: String,
    pub args: Vec<String>,
    /// Derivative of a single-argument atom, e.g. `kp(x)^2 + lambda/x^2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateKind {
    Sde,
    Kbe,
    Kfe,
    FirstIntegral,
    IntegralSymmetry,
    Trivial,
    ConverseSde,
    ConverseIntegral,
}

impl CandidateKind {
    pub const ALL: [CandidateKind; 8] = [
        CandidateKind::Sde,
        CandidateKind::Kbe,
        CandidateKind::Kfe,
        CandidateKind::FirstIntegral,
        CandidateKind::IntegralSymmetry,
        CandidateKind::Trivial,
        CandidateKind::ConverseSde,
        CandidateKind::ConverseIntegral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CandidateKind::Sde => "sde",
            CandidateKind::Kbe => "kbe",
            CandidateKind::Kfe => "kfe",
            CandidateKind::FirstIntegral => "first-integral",
            CandidateKind::IntegralSymmetry => "integral-symmetry",
            CandidateKind::Trivial => "trivial",
            CandidateKind::ConverseSde => "converse-sde",
            CandidateKind::ConverseIntegral => "converse-integral",
        }
    }

    /// Kinds whose candidate is a function `I` rather than a field.
    pub fn takes_integral(self) -> bool {
        matches!(
            self,
            CandidateKind::FirstIntegral | CandidateKind::IntegralSymmetry | CandidateKind::ConverseIntegral
        )
    }
}

impl std::fmt::Display for CandidateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CandidateKind {
    type Err = String;
    fn from_str(s: &str) -> Result<CandidateKind, String> {
        CandidateKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown candidate kind `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSpec {
    pub kind: CandidateKind,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integral: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Verdict>,
    /// Where the candidate comes from, or how a negative was constructed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CandidateSpec {
    pub fn field(kind: CandidateKind, name: &str, tau: &str, xi: &[&str]) -> CandidateSpec {
        CandidateSpec {
            kind,
            name: name.to_string(),
            tau: Some(tau.to_string()),
            xi: Some(xi.iter().map(|s| s.to_string()).collect()),
            multiplier: None,
            shift: None,
            integral: None,
            expect: None,
            note: None,
        }
    }

    pub fn function(kind: CandidateKind, name: &str, integral: &str) -> CandidateSpec {
        CandidateSpec {
            kind,
            name: name.to_string(),
            tau: None,
            xi: None,
            multiplier: None,
            shift: None,
            integral: Some(integral.to_string()),
            expect: None,
            note: None,
        }
    }

    /// `ψ∂_u` for the trivial-symmetry check.
    pub fn solution(name: &str, psi: &str, n: usize) -> CandidateSpec {
        let mut c = CandidateSpec::field(CandidateKind::Trivial, name, "0", &vec!["0"; n]);
        c.shift = Some(psi.to_string());
        c
    }

    pub fn multiplier(mut self, m: &str) -> CandidateSpec {
        self.multiplier = Some(m.to_string());
        self
    }

    pub fn expect(mut self, v: Verdict) -> CandidateSpec {
        self.expect = Some(v);
        self
    }

    pub fn note(mut self, n: &str) -> CandidateSpec {
        self.note = Some(n.to_string());
        self
    }

    /// `kind:name`.
    pub fn key(&self) -> String {
        format!("{}:{}", self.kind, self.name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub states: Vec<String>,
    pub wiener: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<ParamSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<AtomSpec>,
    pub drift: Vec<String>,
    pub diffusion: Vec<Vec<String>>,
    #[serde(default)]
    pub candidates: Vec<CandidateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingConfig>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<ProblemFile, ProblemError> {
        serde_json::from_str(text).map_err(|e| ProblemError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    pub fn context(&self) -> Result<Context, ProblemError> {
        let mut b = Context::builder().states(&self.states);
        for p in &self.params {
            b = b.param_decl(p.decl());
        }
        for a in &self.atoms {
            let args: Vec<&str> = a.args.iter().map(String::as_str).collect();
            b = b.atom(&a.name, &args, a.rule.as_deref());
        }
        Ok(b.build()?)
    }

    pub fn system(&self) -> Result<SdeSystem, ProblemError> {
        let ctx = self.context()?;
        let drift = self
            .drift
            .iter()
            .enumerate()
            .map(|(i, s)| parse_at(s, &ctx, || format!("drift[{}]", i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut diffusion = Vec::with_capacity(self.diffusion.len());
        for (i, row) in self.diffusion.iter().enumerate() {
            if row.len() != self.wiener {
                return Err(ModelError::Dimension(format!(
                    "diffusion row {} has {} entries, wiener is {}",
                    i + 1,
                    row.len(),
                    self.wiener
                ))
                .into());
            }
            let parsed = row
                .iter()
                .enumerate()
                .map(|(a, s)| parse_at(s, &ctx, || format!("diffusion[{},{}]", i + 1, a + 1)))
                .collect::<Result<Vec<_>, _>>()?;
            diffusion.push(parsed);
        }
        Ok(SdeSystem::new(ctx, drift, diffusion)?)
    }

    /// Parses the system and every candidate.
    pub fn compile(&self) -> Result<Problem, ProblemError> {
        let system = self.system()?;
        let candidates = self
            .candidates
            .iter()
            .map(|c| Candidate::compile(c, system.ctx()))
            .collect::<Result<Vec<_>, _>>()?;
        let mut seen = std::collections::BTreeSet::new();
        for c in &candidates {
            if !seen.insert((c.kind, c.name.clone())) {
                return Err(ProblemError::Candidate {
                    name: c.name.clone(),
                    message: format!("declared twice as {}", c.kind),
                });
            }
        }
        Ok(Problem {
            name: self.name.clone(),
            system,
            candidates,
            sampling: self.sampling.clone(),
        })
    }
}

fn parse_at(s: &str, ctx: &Context, place: impl FnOnce() -> String) -> Result<Expr, ProblemError> {
    parse(s, ctx).map_err(|source| ProblemError::Parse { place: place(), source })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub kind: CandidateKind,
    pub name: String,
    /// For function kinds, `I u∂_u`; for `trivial`, `ψ∂_u`.
    pub field: VectorField,
    pub expect: Option<Verdict>,
    pub note: Option<String>,
}

impl Candidate {
    fn compile(spec: &CandidateSpec, ctx: &Context) -> Result<Candidate, ProblemError> {
        let n = ctx.states().len();
        let err = |message: String| ProblemError::Candidate {
            name: spec.name.clone(),
            message,
        };
        let place = |what: &str| format!("candidate `{}` {what}", spec.name);
        let field = if spec.kind.takes_integral() {
            let text = spec
                .integral
                .as_deref()
                .ok_or_else(|| err(format!("kind {} needs `integral`", spec.kind)))?;
            if spec.tau.is_some() || spec.xi.is_some() {
                return Err(err(format!("kind {} takes `integral` only", spec.kind)));
            }
            let i = parse_at(text, ctx, || place("integral"))?;
            VectorField::zero(n).with_multiplier(i)
        } else {
            if spec.integral.is_some() {
                return Err(err(format!("kind {} does not take `integral`", spec.kind)));
            }
            let tau = match &spec.tau {
                Some(s) => parse_at(s, ctx, || place("tau"))?,
                None => Expr::zero(),
            };
            let xi = match &spec.xi {
                Some(v) if v.len() != n => {
                    return Err(err(format!("{} xi entries for {n} states", v.len())));
                }
                Some(v) => v
                    .iter()
                    .enumerate()
                    .map(|(i, s)| parse_at(s, ctx, || place(&format!("xi[{}]", i + 1))))
                    .collect::<Result<Vec<_>, _>>()?,
                None => vec![Expr::zero(); n],
            };
            let mut f = VectorField::new(tau, xi);
            if let Some(m) = &spec.multiplier {
                f = f.with_multiplier(parse_at(m, ctx, || place("multiplier"))?);
            }
            if let Some(s) = &spec.shift {
                f = f.with_shift(parse_at(s, ctx, || place("shift"))?);
            }
            f
        };
        Ok(Candidate {
            kind: spec.kind,
            name: spec.name.clone(),
            field,
            expect: spec.expect,
            note: spec.note.clone(),
        })
    }

    pub fn key(&self) -> String {
        format!("{}:{}", self.kind, self.name)
    }

    /// The function `I` of a function-kind candidate.
    pub fn integral(&self) -> Expr {
        self.field.multiplier_or_zero()
    }

    /// Runs the check matching the candidate's kind.
    pub fn check(&self, s: &SdeSystem, cfg: &SamplingConfig) -> Result<CheckReport, CheckError> {
        let name = &self.name;
        match self.kind {
            CandidateKind::Sde => check_sde_symmetry(s, &self.field, name, cfg),
            CandidateKind::Kbe => check_kbe_symmetry(&s.kbe(), &self.field, name, cfg),
            CandidateKind::Kfe => check_kfe_symmetry(&s.kfe()?, &self.field, name, cfg),
            CandidateKind::FirstIntegral => Ok(s.check_first_integral(&self.integral(), name, cfg)?),
            CandidateKind::IntegralSymmetry => check_integral_symmetry(&s.kbe(), &self.integral(), name, cfg),
            CandidateKind::Trivial => check_trivial_symmetry(&s.kbe(), &self.field.shift_or_zero(), name, cfg),
            CandidateKind::ConverseSde => converse_sde_from_kbe(s, &self.field, name, cfg),
            CandidateKind::ConverseIntegral => converse_integral_from_kbe(s, &self.integral(), name, cfg),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub name: Option<String>,
    pub system: SdeSystem,
    pub candidates: Vec<Candidate>,
    pub sampling: Option<SamplingConfig>,
}

impl Problem {
    /// Finds a candidate by `name` or `kind:name`.
    pub fn candidate(&self, selector: &str) -> Result<&Candidate, ProblemError> {
        let (kind, name) = match selector.split_once(':') {
            Some((k, n)) => (
                Some(
                    k.parse::<CandidateKind>()
                        .map_err(|_| ProblemError::UnknownCandidate(selector.to_string()))?,
                ),
                n,
            ),
            None => (None, selector),
        };
        let mut hits = self
            .candidates
            .iter()
            .filter(|c| c.name == name && kind.is_none_or(|k| c.kind == k));
        let first = hits.next().ok_or_else(|| ProblemError::UnknownCandidate(selector.to_string()))?;
        if hits.next().is_some() {
            return Err(ProblemError::Ambiguous(selector.to_string()));
        }
        Ok(first)
    }

    pub fn of_kind(&self, kind: CandidateKind) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter().filter(move |c| c.kind == kind)
    }
}
