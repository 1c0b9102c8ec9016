//! Second prolongation in jet space and the invariance condition of a
//! Kolmogorov equation, computed from first principles.
//!
//! This is an independent route to the verdicts of [`crate::checks`]: the
//! prolonged field is applied to `Δ = u_t + a_ij u_ij + b_k u_k + c u`, `u_t`
//! and `u_{tx_j}` are eliminated on solutions, and every coefficient of the
//! remaining jet polynomial has to vanish.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::checks::{CheckError, CheckKind, CheckReport, ReportBuilder};
use crate::expr::{Context, Expr, ExprError, SamplingConfig};
use crate::fields::{FieldError, VectorField};
use crate::model::KolmogorovEquation;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JetError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("second time derivative {0} cannot be eliminated")]
    Unreducible(String),
}

impl From<JetError> for CheckError {
    fn from(e: JetError) -> Self {
        match e {
            JetError::Field(f) => CheckError::Field(f),
            JetError::Expr(x) => x.into(),
            JetError::Unreducible(m) => CheckError::CandidateForm(m),
        }
    }
}

/// Formal derivative `∂_t^k ∂_{x_i}∂_{x_j}… u`; spatial indices kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct JetVar {
    t_order: u32,
    xs: Vec<usize>,
}

impl JetVar {
    pub fn new(t_order: u32, mut xs: Vec<usize>) -> JetVar {
        xs.sort_unstable();
        JetVar { t_order, xs }
    }

    pub fn u() -> JetVar {
        JetVar::new(0, vec![])
    }

    pub fn ut() -> JetVar {
        JetVar::new(1, vec![])
    }

    pub fn ux(i: usize) -> JetVar {
        JetVar::new(0, vec![i])
    }

    pub fn utx(i: usize) -> JetVar {
        JetVar::new(1, vec![i])
    }

    pub fn uxx(i: usize, j: usize) -> JetVar {
        JetVar::new(0, vec![i, j])
    }

    pub fn uxxx(i: usize, j: usize, k: usize) -> JetVar {
        JetVar::new(0, vec![i, j, k])
    }

    pub fn t_order(&self) -> u32 {
        self.t_order
    }

    pub fn x_indices(&self) -> &[usize] {
        &self.xs
    }

    pub fn order(&self) -> usize {
        self.t_order as usize + self.xs.len()
    }

    fn dx(&self, i: usize) -> JetVar {
        let mut xs = self.xs.clone();
        xs.push(i);
        JetVar::new(self.t_order, xs)
    }

    fn dt(&self) -> JetVar {
        JetVar::new(self.t_order + 1, self.xs.clone())
    }

    /// `u`, `u_t`, `u_xx`, or `u_{t x1 x2}` when a state name is longer than one character.
    pub fn name(&self, states: &[String]) -> String {
        if self.order() == 0 {
            return "u".into();
        }
        let mut parts: Vec<&str> = vec!["t"; self.t_order as usize];
        parts.extend(self.xs.iter().map(|&i| states[i].as_str()));
        if parts.iter().all(|p| p.chars().count() == 1) {
            format!("u_{}", parts.concat())
        } else {
            format!("u_{{{}}}", parts.join(" "))
        }
    }
}

/// Product of jet variables; the empty product is `1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct JetMonomial(Vec<JetVar>);

impl JetMonomial {
    pub fn one() -> JetMonomial {
        JetMonomial(Vec::new())
    }

    pub fn var(v: JetVar) -> JetMonomial {
        JetMonomial(vec![v])
    }

    pub fn vars(&self) -> &[JetVar] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    /// Highest derivative order among the factors.
    pub fn order(&self) -> usize {
        self.0.iter().map(JetVar::order).max().unwrap_or(0)
    }

    fn times(&self, other: &JetMonomial) -> JetMonomial {
        let mut vs = self.0.clone();
        vs.extend(other.0.iter().cloned());
        vs.sort();
        JetMonomial(vs)
    }

    fn replaced(&self, k: usize, v: JetVar) -> JetMonomial {
        let mut vs = self.0.clone();
        vs[k] = v;
        vs.sort();
        JetMonomial(vs)
    }

    pub fn name(&self, states: &[String]) -> String {
        if self.0.is_empty() {
            return "1".into();
        }
        let names: Vec<String> = self.0.iter().map(|v| v.name(states)).collect();
        names.join("*")
    }
}

/// Which total derivative to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    T,
    X(usize),
}

/// Polynomial in jet variables with coefficients in `(t, x)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JetExpression {
    terms: BTreeMap<JetMonomial, Expr>,
}

impl JetExpression {
    pub fn zero() -> JetExpression {
        JetExpression::default()
    }

    pub fn constant(c: Expr) -> JetExpression {
        JetExpression::term(JetMonomial::one(), c)
    }

    pub fn var(v: JetVar) -> JetExpression {
        JetExpression::term(JetMonomial::var(v), Expr::one())
    }

    pub fn term(m: JetMonomial, c: Expr) -> JetExpression {
        let mut out = JetExpression::zero();
        out.push(m, c);
        out
    }

    fn push(&mut self, m: JetMonomial, c: Expr) {
        if c.is_literal_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_insert_with(Expr::zero);
        *slot = &*slot + &c;
    }

    pub fn terms(&self) -> impl Iterator<Item = (&JetMonomial, &Expr)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &JetMonomial) -> Expr {
        self.terms.get(m).cloned().unwrap_or_else(Expr::zero)
    }

    /// Coefficient of a single jet variable.
    pub fn coefficient_of(&self, v: &JetVar) -> Expr {
        self.coefficient(&JetMonomial::var(v.clone()))
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &JetExpression) -> JetExpression {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.push(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> JetExpression {
        self.scale(&Expr::int(-1))
    }

    pub fn sub(&self, other: &JetExpression) -> JetExpression {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Expr) -> JetExpression {
        let mut out = JetExpression::zero();
        if c.is_literal_zero() {
            return out;
        }
        for (m, k) in &self.terms {
            out.push(m.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &JetExpression) -> JetExpression {
        let mut out = JetExpression::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.push(m1.times(m2), c1 * c2);
            }
        }
        out
    }

    /// Normalizes every coefficient and drops the vanishing ones.
    pub fn normalize(&self) -> Result<JetExpression, ExprError> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let c = c.normalize()?;
            if !c.is_literal_zero() {
                terms.insert(m.clone(), c);
            }
        }
        Ok(JetExpression { terms })
    }

    /// Total derivative: coefficients by the chain rule, jet variables by shifting.
    pub fn total_derivative(&self, dir: Direction, ctx: &Context) -> Result<JetExpression, ExprError> {
        let var = match dir {
            Direction::T => ctx.time(),
            Direction::X(i) => ctx.states()[i].as_str(),
        };
        let mut out = JetExpression::zero();
        for (m, c) in &self.terms {
            out.push(m.clone(), c.differentiate(var, ctx)?);
            for (k, v) in m.0.iter().enumerate() {
                let shifted = match dir {
                    Direction::T => v.dt(),
                    Direction::X(i) => v.dx(i),
                };
                out.push(m.replaced(k, shifted), c.clone());
            }
        }
        Ok(out)
    }

    /// Replaces every occurrence of the jet variables matched by `rule`.
    pub fn substitute<F>(&self, mut rule: F) -> Result<JetExpression, JetError>
    where
        F: FnMut(&JetVar) -> Result<Option<JetExpression>, JetError>,
    {
        let mut out = JetExpression::zero();
        for (m, c) in &self.terms {
            let mut acc = JetExpression::constant(c.clone());
            for v in &m.0 {
                let factor = match rule(v)? {
                    Some(e) => e,
                    None => JetExpression::var(v.clone()),
                };
                acc = acc.mul(&factor);
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    pub fn display<'a>(&'a self, ctx: &'a Context) -> JetDisplay<'a> {
        JetDisplay { expr: self, ctx }
    }
}

pub struct JetDisplay<'a> {
    expr: &'a JetExpression,
    ctx: &'a Context,
}

impl fmt::Display for JetDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.expr.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.expr.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            if m.degree() == 0 {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*{}", m.name(self.ctx.states()))?;
            }
        }
        Ok(())
    }
}

/// A field together with `η` and the first and second prolongation coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ProlongedField {
    pub field: VectorField,
    pub eta: JetExpression,
    pub zeta_t: JetExpression,
    pub zeta_x: Vec<JetExpression>,
    /// Symmetric; `zeta_xx[i][j]` equals `zeta_xx[j][i]`.
    pub zeta_xx: Vec<Vec<JetExpression>>,
}

/// Second prolongation of `τ∂_t + ξ_i∂_i + (φu + ψ)∂_u`.
pub fn prolong(x: &VectorField, ctx: &Context) -> Result<ProlongedField, JetError> {
    x.check_scope(ctx)?;
    let n = x.dim();
    let eta = JetExpression::term(JetMonomial::var(JetVar::u()), x.multiplier_or_zero())
        .add(&JetExpression::constant(x.shift_or_zero()));
    let tau = JetExpression::constant(x.tau.clone());
    let xi: Vec<JetExpression> = x.xi.iter().cloned().map(JetExpression::constant).collect();

    let first = |dir: Direction| -> Result<JetExpression, JetError> {
        let mut z = eta.total_derivative(dir, ctx)?;
        z = z.sub(&JetExpression::var(JetVar::ut()).mul(&tau.total_derivative(dir, ctx)?));
        for (j, xij) in xi.iter().enumerate() {
            z = z.sub(&JetExpression::var(JetVar::ux(j)).mul(&xij.total_derivative(dir, ctx)?));
        }
        Ok(z.normalize()?)
    };
    let zeta_t = first(Direction::T)?;
    let zeta_x = (0..n).map(|i| first(Direction::X(i))).collect::<Result<Vec<_>, _>>()?;

    let mut zeta_xx = vec![vec![JetExpression::zero(); n]; n];
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        for j in i..n {
            let mut z = zeta_x[i].total_derivative(Direction::X(j), ctx)?;
            z = z.sub(&JetExpression::var(JetVar::utx(i)).mul(&tau.total_derivative(Direction::X(j), ctx)?));
            for (k, xik) in xi.iter().enumerate() {
                let dxi = xik.total_derivative(Direction::X(j), ctx)?;
                z = z.sub(&JetExpression::var(JetVar::uxx(i, k)).mul(&dxi));
            }
            let z = z.normalize()?;
            zeta_xx[j][i] = z.clone();
            zeta_xx[i][j] = z;
        }
    }
    Ok(ProlongedField {
        field: x.clone(),
        eta,
        zeta_t,
        zeta_x,
        zeta_xx,
    })
}

/// `Δ` itself as a jet polynomial.
pub fn equation_jet(e: &KolmogorovEquation) -> JetExpression {
    JetExpression::var(JetVar::ut()).sub(&solved_rhs(e))
}

/// `-(a_ij u_ij + b_k u_k + c u)`, the value of `u_t` on solutions.
fn solved_rhs(e: &KolmogorovEquation) -> JetExpression {
    let n = e.system().n();
    let mut s = JetExpression::zero();
    for i in 0..n {
        for j in 0..n {
            s = s.add(&JetExpression::term(JetMonomial::var(JetVar::uxx(i, j)), e.second_order()[i][j].clone()));
        }
        s = s.add(&JetExpression::term(JetMonomial::var(JetVar::ux(i)), e.first_order()[i].clone()));
    }
    s = s.add(&JetExpression::term(JetMonomial::var(JetVar::u()), e.zeroth_order().clone()));
    s.neg()
}

/// `pr X(Δ)` restricted to solutions, with normalized coefficients.
pub fn invariance_residual(e: &KolmogorovEquation, x: &VectorField) -> Result<JetExpression, JetError> {
    let ctx = e.system().ctx();
    let n = e.system().n();
    let p = prolong(x, ctx)?;
    let mut r = p.zeta_t.clone();
    for i in 0..n {
        for j in 0..n {
            let a = &e.second_order()[i][j];
            r = r.add(&p.zeta_xx[i][j].scale(a));
            r = r.add(&JetExpression::term(JetMonomial::var(JetVar::uxx(i, j)), x.apply(a, ctx)?));
        }
        let b = &e.first_order()[i];
        r = r.add(&p.zeta_x[i].scale(b));
        r = r.add(&JetExpression::term(JetMonomial::var(JetVar::ux(i)), x.apply(b, ctx)?));
    }
    let c = e.zeroth_order();
    r = r.add(&p.eta.scale(c));
    r = r.add(&JetExpression::term(JetMonomial::var(JetVar::u()), x.apply(c, ctx)?));

    let solved = solved_rhs(e).normalize()?;
    let mut derived: BTreeMap<Vec<usize>, JetExpression> = BTreeMap::new();
    let r = r.substitute(|v| {
        match v.t_order {
            0 => return Ok(None),
            1 => {}
            _ => return Err(JetError::Unreducible(v.name(ctx.states()))),
        }
        if let Some(s) = derived.get(&v.xs) {
            return Ok(Some(s.clone()));
        }
        let mut s = solved.clone();
        for &i in &v.xs {
            s = s.total_derivative(Direction::X(i), ctx)?;
        }
        derived.insert(v.xs.clone(), s.clone());
        Ok(Some(s))
    })?;
    Ok(r.normalize()?)
}

/// Nonzero coefficients of `j`, grouped by monomial in canonical order.
pub fn split_by_monomials(j: &JetExpression) -> Vec<(JetMonomial, Expr)> {
    j.terms
        .iter()
        .filter(|(_, c)| !c.is_literal_zero())
        .map(|(m, c)| (m.clone(), c.clone()))
        .collect()
}

/// Decides every coefficient of the invariance residual. An empty residual
/// is recorded as a single zero entry labelled `residual`.
pub fn check_invariance(
    e: &KolmogorovEquation,
    x: &VectorField,
    name: &str,
    cfg: &SamplingConfig,
) -> Result<CheckReport, CheckError> {
    let ctx = e.system().ctx();
    let r = invariance_residual(e, x)?;
    let mut b = ReportBuilder::new(CheckKind::JetOracle, name, ctx, cfg);
    let split = split_by_monomials(&r);
    if split.is_empty() {
        b.residual("residual", Expr::zero())?;
    }
    for (m, c) in split {
        b.residual(&m.name(ctx.states()), c)?;
    }
    b.note_divisions(x.components().iter());
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::model::SdeSystem;

    fn heat() -> SdeSystem {
        let ctx = Context::builder().state("x").build().unwrap();
        SdeSystem::new(ctx, vec![Expr::zero()], vec![vec![Expr::one()]]).unwrap()
    }

    fn field(s: &SdeSystem, tau: &str, xi: &str, phi: Option<&str>) -> VectorField {
        let ctx = s.ctx();
        let x = VectorField::new(parse(tau, ctx).unwrap(), vec![parse(xi, ctx).unwrap()]);
        match phi {
            Some(p) => x.with_multiplier(parse(p, ctx).unwrap()),
            None => x,
        }
    }

    fn jet(s: &SdeSystem, pairs: &[(JetVar, &str)]) -> JetExpression {
        let mut out = JetExpression::zero();
        for (v, c) in pairs {
            out = out.add(&JetExpression::term(JetMonomial::var(v.clone()), parse(c, s.ctx()).unwrap()));
        }
        out.normalize().unwrap()
    }

    #[test]
    fn names_are_canonical() {
        let xs = vec!["x".to_string(), "y".to_string()];
        assert_eq!(JetVar::uxx(1, 0), JetVar::uxx(0, 1));
        assert_eq!(JetVar::uxx(1, 0).name(&xs), "u_xy");
        assert_eq!(JetVar::utx(0).name(&xs), "u_tx");
        let long = vec!["x1".to_string(), "x2".to_string()];
        assert_eq!(JetVar::uxx(0, 1).name(&long), "u_{x1 x2}");
    }

    #[test]
    fn constant_field_has_zero_prolongation() {
        let s = heat();
        let p = prolong(&field(&s, "1", "0", None), s.ctx()).unwrap();
        assert!(p.zeta_t.is_empty() && p.zeta_x[0].is_empty() && p.zeta_xx[0][0].is_empty());
    }

    #[test]
    fn linearity_field_prolongs_to_derivatives() {
        let s = heat();
        let p = prolong(&VectorField::x0(1), s.ctx()).unwrap();
        assert_eq!(p.zeta_t, JetExpression::var(JetVar::ut()));
        assert_eq!(p.zeta_x[0], JetExpression::var(JetVar::ux(0)));
        assert_eq!(p.zeta_xx[0][0], JetExpression::var(JetVar::uxx(0, 0)));
    }

    #[test]
    fn heat_galilean_prolongation() {
        // t∂_x + x u∂_u: η = xu
        let s = heat();
        let p = prolong(&field(&s, "0", "t", Some("x")), s.ctx()).unwrap();
        assert_eq!(p.zeta_t, jet(&s, &[(JetVar::ut(), "x"), (JetVar::ux(0), "-1")]));
        assert_eq!(p.zeta_x[0], jet(&s, &[(JetVar::u(), "1"), (JetVar::ux(0), "x")]));
        assert_eq!(p.zeta_xx[0][0], jet(&s, &[(JetVar::ux(0), "2"), (JetVar::uxx(0, 0), "x")]));
    }

    #[test]
    fn rejects_u_dependent_coefficients() {
        let s = heat();
        let x = VectorField::new(Expr::zero(), vec![Expr::sym("u")]);
        assert!(matches!(prolong(&x, s.ctx()), Err(JetError::Field(_))));
    }

    #[test]
    fn heat_residuals() {
        let s = heat();
        let e = s.kbe();
        assert!(invariance_residual(&e, &field(&s, "1", "0", None)).unwrap().is_empty());
        assert!(invariance_residual(&e, &field(&s, "2*t", "x", None)).unwrap().is_empty());
        let r = invariance_residual(&e, &field(&s, "0", "x", None)).unwrap();
        assert_eq!(r.coefficient_of(&JetVar::uxx(0, 0)), parse("-1", s.ctx()).unwrap());
        assert_eq!(split_by_monomials(&r).len(), 1);
    }

    #[test]
    fn third_order_coefficient_carries_a_tau_x() {
        let ctx = Context::builder().state("x").atom("F", &["t", "x"], None).atom("T", &["t", "x"], None).build().unwrap();
        let f = parse("F(t,x)", &ctx).unwrap();
        let s = SdeSystem::new(ctx.clone(), vec![f], vec![vec![parse("x", &ctx).unwrap()]]).unwrap();
        let x = VectorField::new(parse("T(t,x)", &ctx).unwrap(), vec![Expr::zero()]);
        let r = invariance_residual(&s.kbe(), &x).unwrap();
        let c = r.coefficient_of(&JetVar::uxxx(0, 0, 0));
        let a = &s.a_matrix()[0][0];
        let tau_x = x.tau.differentiate("x", &ctx).unwrap();
        let expected = (Expr::int(2) * a.clone() * (a * &tau_x)).normalize().unwrap();
        assert_eq!(c, expected);
    }

    #[test]
    fn zero_split_is_empty() {
        assert!(split_by_monomials(&JetExpression::zero()).is_empty());
    }

    #[test]
    fn check_report_labels_monomials() {
        let s = heat();
        let rep = check_invariance(&s.kbe(), &field(&s, "0", "x", None), "x*d_x", &SamplingConfig::default()).unwrap();
        assert!(!rep.passed());
        assert!(rep.residual("u_xx").is_some());
        let ok = check_invariance(&s.kbe(), &field(&s, "0", "t", Some("x")), "Y1", &SamplingConfig::default()).unwrap();
        assert!(ok.passed() && ok.all_symbolic());
    }
}
