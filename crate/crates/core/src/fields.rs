//! Candidate symmetry fields `τ∂_t + ξ_i∂_i + φu∂_u + ψ∂_u`, Lie brackets,
//! equality modulo `u∂_u`, and span membership.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::expr::canon::canonical;
use crate::expr::{
    eval_numeric, is_zero, Context, Env, Expr, ExprError, Rational, SamplingConfig, ZeroError, DEPENDENT,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("dimension mismatch: {0} vs {1} state coefficients")]
    Dimension(usize, usize),
    #[error("{0}")]
    Scope(String),
    #[error("empty basis")]
    EmptyBasis,
    #[error("no valid sample point after {0} redraws")]
    Sampling(usize),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Zero(#[from] ZeroError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorField {
    pub tau: Expr,
    pub xi: Vec<Expr>,
    /// Coefficient of `u∂_u` (φ for the backward equation, χ for the forward one).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<Expr>,
    /// Coefficient of `∂_u` for superposition fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Expr>,
}

impl VectorField {
    pub fn new(tau: Expr, xi: Vec<Expr>) -> VectorField {
        VectorField {
            tau,
            xi,
            multiplier: None,
            shift: None,
        }
    }

    pub fn zero(n: usize) -> VectorField {
        VectorField::new(Expr::zero(), vec![Expr::zero(); n])
    }

    /// `u∂_u`.
    pub fn x0(n: usize) -> VectorField {
        VectorField::zero(n).with_multiplier(Expr::one())
    }

    pub fn with_multiplier(mut self, m: Expr) -> VectorField {
        self.multiplier = Some(m);
        self
    }

    pub fn with_shift(mut self, s: Expr) -> VectorField {
        self.shift = Some(s);
        self
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn multiplier_or_zero(&self) -> Expr {
        self.multiplier.clone().unwrap_or_else(Expr::zero)
    }

    pub fn shift_or_zero(&self) -> Expr {
        self.shift.clone().unwrap_or_else(Expr::zero)
    }

    pub fn has_u_part(&self) -> bool {
        self.multiplier.as_ref().is_some_and(|m| !m.is_literal_zero())
            || self.shift.as_ref().is_some_and(|s| !s.is_literal_zero())
    }

    /// All coefficients: τ, ξ_1..ξ_n, multiplier, shift (absent ones as 0).
    pub fn components(&self) -> Vec<Expr> {
        let mut out = Vec::with_capacity(self.xi.len() + 3);
        out.push(self.tau.clone());
        out.extend(self.xi.iter().cloned());
        out.push(self.multiplier_or_zero());
        out.push(self.shift_or_zero());
        out
    }

    fn component_names(ctx: &Context) -> Vec<String> {
        let mut out = vec!["tau".to_string()];
        out.extend(ctx.states().iter().map(|x| format!("xi[{x}]")));
        out.push("multiplier".into());
        out.push("shift".into());
        out
    }

    pub fn check_scope(&self, ctx: &Context) -> Result<(), FieldError> {
        if self.xi.len() != ctx.states().len() {
            return Err(FieldError::Dimension(self.xi.len(), ctx.states().len()));
        }
        for e in self.components() {
            if e.contains_symbol(DEPENDENT) {
                return Err(FieldError::Scope("field coefficients may not depend on u".into()));
            }
            ctx.check_scope(&e).map_err(FieldError::Scope)?;
        }
        Ok(())
    }

    /// `X(F) = τF_t + ξ_iF_i` (no u-part), unnormalized.
    pub fn apply(&self, f: &Expr, ctx: &Context) -> Result<Expr, ExprError> {
        let mut terms = Vec::with_capacity(self.xi.len() + 1);
        if !self.tau.is_literal_zero() {
            terms.push(&self.tau * &f.differentiate(ctx.time(), ctx)?);
        }
        for (xi, x) in self.xi.iter().zip(ctx.states()) {
            if !xi.is_literal_zero() {
                terms.push(xi * &f.differentiate(x, ctx)?);
            }
        }
        Ok(Expr::add_all(terms))
    }

    pub fn normalize(&self) -> Result<VectorField, ExprError> {
        Ok(VectorField {
            tau: self.tau.normalize()?,
            xi: self.xi.iter().map(Expr::normalize).collect::<Result<_, _>>()?,
            multiplier: self.multiplier.as_ref().map(Expr::normalize).transpose()?,
            shift: self.shift.as_ref().map(Expr::normalize).transpose()?,
        })
    }

    pub fn scale(&self, c: &Expr) -> VectorField {
        VectorField {
            tau: c * &self.tau,
            xi: self.xi.iter().map(|e| c * e).collect(),
            multiplier: self.multiplier.as_ref().map(|e| c * e),
            shift: self.shift.as_ref().map(|e| c * e),
        }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        let opt = |a: &Option<Expr>, b: &Option<Expr>| match (a, b) {
            (None, None) => None,
            _ => Some(a.clone().unwrap_or_else(Expr::zero) + b.clone().unwrap_or_else(Expr::zero)),
        };
        VectorField {
            tau: &self.tau + &other.tau,
            xi: self.xi.iter().zip(&other.xi).map(|(a, b)| a + b).collect(),
            multiplier: opt(&self.multiplier, &other.multiplier),
            shift: opt(&self.shift, &other.shift),
        }
    }

    /// Display with explicit state names, e.g. `2*t*d_t + x*d_x + u*d_u`.
    pub fn display<'a>(&'a self, ctx: &'a Context) -> FieldDisplay<'a> {
        FieldDisplay { field: self, ctx }
    }
}

pub struct FieldDisplay<'a> {
    field: &'a VectorField,
    ctx: &'a Context,
}

impl fmt::Display for FieldDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        let mut push = |c: &Expr, op: String| {
            if c.is_literal_zero() {
                return;
            }
            let bare = match c.node() {
                crate::expr::Node::Sym(_) | crate::expr::Node::Func(..) | crate::expr::Node::Atom(_) => true,
                crate::expr::Node::Num(q) => !q.is_negative() && q.is_integer(),
                _ => false,
            };
            if c.is_literal_one() {
                parts.push(op);
            } else if bare {
                parts.push(format!("{c}*{op}"));
            } else {
                parts.push(format!("({c})*{op}"));
            }
        };
        push(&self.field.tau, format!("d_{}", self.ctx.time()));
        for (xi, x) in self.field.xi.iter().zip(self.ctx.states()) {
            push(xi, format!("d_{x}"));
        }
        if let Some(m) = &self.field.multiplier {
            push(m, "u*d_u".into());
        }
        if let Some(s) = &self.field.shift {
            push(s, "d_u".into());
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// Ordered, uniquely named fields.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldBasis {
    entries: Vec<(String, VectorField)>,
}

impl FieldBasis {
    pub fn new() -> FieldBasis {
        FieldBasis::default()
    }

    /// Adds a field; returns `false` (and changes nothing) on a duplicate name.
    pub fn push(&mut self, name: &str, field: VectorField) -> bool {
        if self.get(name).is_some() {
            return false;
        }
        self.entries.push((name.to_string(), field));
        true
    }

    pub fn get(&self, name: &str) -> Option<&VectorField> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn fields(&self) -> impl Iterator<Item = &VectorField> {
        self.entries.iter().map(|(_, f)| f)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &VectorField)> {
        self.entries.iter().map(|(n, f)| (n.as_str(), f))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `[X, Y]` of first-order operators; u-parts bracket as `X(φ_Y) - Y(φ_X)`
/// for multipliers and `X(ψ_Y) - Y(ψ_X) + ψ_Xφ_Y - ψ_Yφ_X` for shifts.
pub fn lie_bracket(x: &VectorField, y: &VectorField, ctx: &Context) -> Result<VectorField, FieldError> {
    if x.dim() != y.dim() {
        return Err(FieldError::Dimension(x.dim(), y.dim()));
    }
    let comm = |a: &Expr, b: &Expr| -> Result<Expr, ExprError> { (x.apply(b, ctx)? - y.apply(a, ctx)?).normalize() };
    let tau = comm(&x.tau, &y.tau)?;
    let xi = x
        .xi
        .iter()
        .zip(&y.xi)
        .map(|(a, b)| comm(a, b))
        .collect::<Result<Vec<_>, _>>()?;
    let multiplier = match (&x.multiplier, &y.multiplier) {
        (None, None) => None,
        _ => Some(comm(&x.multiplier_or_zero(), &y.multiplier_or_zero())?),
    };
    let shift = match (&x.shift, &y.shift) {
        (None, None) => None,
        _ => {
            let (px, py) = (x.multiplier_or_zero(), y.multiplier_or_zero());
            let (sx, sy) = (x.shift_or_zero(), y.shift_or_zero());
            let e = x.apply(&sy, ctx)? - y.apply(&sx, ctx)? + &sx * &py - &sy * &px;
            Some(e.normalize()?)
        }
    };
    Ok(VectorField {
        tau,
        xi,
        multiplier,
        shift,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ModX0 {
    /// `multiplier(X) - multiplier(Y) = c`.
    Equal { c: Rational },
    Mismatch { component: String },
}

/// Compares two fields up to a constant multiple of `u∂_u`.
pub fn equals_mod_x0(x: &VectorField, y: &VectorField, ctx: &Context, cfg: &SamplingConfig) -> Result<ModX0, FieldError> {
    if x.dim() != y.dim() {
        return Err(FieldError::Dimension(x.dim(), y.dim()));
    }
    let names = VectorField::component_names(ctx);
    let (cx, cy) = (x.components(), y.components());
    for k in [0usize]
        .into_iter()
        .chain(1..=x.dim())
        .chain([x.dim() + 2])
    {
        if !is_zero(&(&cx[k] - &cy[k]), ctx, cfg)?.is_zero() {
            return Ok(ModX0::Mismatch {
                component: names[k].clone(),
            });
        }
    }
    let diff = &cx[x.dim() + 1] - &cy[x.dim() + 1];
    if let Some(c) = canonical(&diff)?.as_constant() {
        return Ok(ModX0::Equal { c });
    }
    // Not literally constant: require vanishing gradient, read the constant numerically.
    let vars = std::iter::once(ctx.time().to_string()).chain(ctx.states().iter().cloned());
    for v in vars {
        if !is_zero(&diff.differentiate(&v, ctx)?, ctx, cfg)?.is_zero() {
            return Ok(ModX0::Mismatch {
                component: "multiplier".into(),
            });
        }
    }
    let samples = crate::expr::sample(&diff, ctx, cfg)?;
    match rationalize(samples[0].value, 10_000, 1e-9) {
        Some(c) => Ok(ModX0::Equal { c }),
        None => Ok(ModX0::Mismatch {
            component: "multiplier".into(),
        }),
    }
}

/// Best rational approximation with denominator at most `max_den`, if within `tol` (relative).
pub fn rationalize(v: f64, max_den: i64, tol: f64) -> Option<Rational> {
    if !v.is_finite() {
        return None;
    }
    let target = tol * v.abs().max(1.0);
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut x = v;
    for _ in 0..64 {
        let a = x.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if ((h1 as f64) / (k1 as f64) - v).abs() <= target {
            return Some(Rational::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let frac = x - a;
        if frac.abs() < 1e-300 {
            break;
        }
        x = 1.0 / frac;
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum SpanResult {
    InSpan {
        /// One coefficient per basis element, as expressions in the parameters.
        coefficients: Vec<Expr>,
        /// Largest scaled least-squares residual over all samples.
        residual: f64,
        /// The fitted combination was confirmed by `is_zero`.
        certified: bool,
    },
    NotInSpan {
        residual: f64,
    },
}

const MAX_PARAM_DEGREE: u32 = 4;

fn monomials(nvars: usize, degree: u32) -> Vec<Vec<u32>> {
    if nvars == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for d in 0..=degree {
        for mut rest in monomials(nvars - 1, degree - d) {
            rest.insert(0, d);
            out.push(rest);
        }
    }
    out.sort_by_key(|m| (m.iter().sum::<u32>(), std::cmp::Reverse(m.clone())));
    out
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Numeric least squares per parameter sample, then a polynomial fit of each
/// coefficient in the parameters (total degree ≤ 4), then symbolic certification.
pub fn span_membership(
    x: &VectorField,
    basis: &FieldBasis,
    ctx: &Context,
    cfg: &SamplingConfig,
) -> Result<SpanResult, FieldError> {
    cfg.validate()?;
    if basis.is_empty() {
        return Err(FieldError::EmptyBasis);
    }
    for f in basis.fields() {
        if f.dim() != x.dim() {
            return Err(FieldError::Dimension(f.dim(), x.dim()));
        }
    }
    let k = basis.len();
    let target = x.components();
    let cols: Vec<Vec<Expr>> = basis.fields().map(VectorField::components).collect();
    let mut used = std::collections::BTreeSet::new();
    for e in target.iter().chain(cols.iter().flatten()) {
        used.extend(e.free_symbols());
    }
    let params: Vec<String> = ctx
        .param_names()
        .into_iter()
        .filter(|p| used.contains(*p))
        .map(str::to_string)
        .collect();
    let vars: Vec<String> = std::iter::once(ctx.time().to_string())
        .chain(ctx.states().iter().cloned())
        .collect();
    let n_param_samples = if params.is_empty() {
        1
    } else {
        binomial(params.len() + MAX_PARAM_DEGREE as usize, MAX_PARAM_DEGREE as usize) + 4
    };
    let n_points = 2 * k + 2;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let draw = |rng: &mut ChaCha8Rng, name: &str| {
        let (lo, hi) = cfg.range_for(name, ctx);
        if lo == hi {
            lo
        } else {
            rng.gen_range(lo..=hi)
        }
    };

    let mut param_samples: Vec<Vec<f64>> = Vec::new();
    let mut coeff_samples: Vec<Vec<f64>> = Vec::new();
    let mut worst = 0.0f64;
    for _ in 0..n_param_samples {
        let pvals: Vec<f64> = params.iter().map(|p| draw(&mut rng, p)).collect();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut rhs: Vec<f64> = Vec::new();
        for _ in 0..n_points {
            let mut tries = 0;
            loop {
                let mut env = Env {
                    atom_seed: cfg.seed,
                    ..Env::default()
                };
                for (p, v) in params.iter().zip(&pvals) {
                    env.set(p, *v);
                }
                for v in &vars {
                    let val = draw(&mut rng, v);
                    env.set(v, val);
                }
                match eval_rows(&target, &cols, &env) {
                    Ok((r, b)) => {
                        rows.extend(r);
                        rhs.extend(b);
                        break;
                    }
                    Err(()) => {
                        tries += 1;
                        if tries > cfg.max_retries {
                            return Err(FieldError::Sampling(cfg.max_retries));
                        }
                    }
                }
            }
        }
        let m = DMatrix::from_fn(rows.len(), k, |r, c| rows[r][c]);
        let b = DVector::from_vec(rhs);
        let svd = m.clone().svd(true, true);
        let c = svd
            .solve(&b, 1e-12)
            .map_err(|_| FieldError::Sampling(0))?;
        let res = (&m * &c - &b).norm() / (1.0 + b.norm());
        worst = worst.max(res);
        if res >= cfg.tol {
            return Ok(SpanResult::NotInSpan { residual: res });
        }
        param_samples.push(pvals);
        coeff_samples.push(c.iter().copied().collect());
    }

    let fitted = fit_coefficients(&params, &param_samples, &coeff_samples);
    let (coefficients, fitted_ok) = match fitted {
        Some(c) => (c, true),
        None => (
            coeff_samples[0]
                .iter()
                .map(|v| Expr::num(Rational::from_float(*v).unwrap_or_else(Rational::zero)))
                .collect(),
            false,
        ),
    };
    let certified = fitted_ok && certify(x, basis, &coefficients, ctx, cfg)?;
    Ok(SpanResult::InSpan {
        coefficients,
        residual: worst,
        certified,
    })
}

fn eval_rows(target: &[Expr], cols: &[Vec<Expr>], env: &Env) -> Result<(Vec<Vec<f64>>, Vec<f64>), ()> {
    let mut rows = Vec::with_capacity(target.len());
    let mut rhs = Vec::with_capacity(target.len());
    for (i, t) in target.iter().enumerate() {
        rhs.push(eval_numeric(t, env).map_err(|_| ())?);
        let mut row = Vec::with_capacity(cols.len());
        for col in cols {
            row.push(eval_numeric(&col[i], env).map_err(|_| ())?);
        }
        rows.push(row);
    }
    Ok((rows, rhs))
}

fn fit_coefficients(params: &[String], samples: &[Vec<f64>], values: &[Vec<f64>]) -> Option<Vec<Expr>> {
    let k = values[0].len();
    let mut out = Vec::with_capacity(k);
    'coeff: for j in 0..k {
        let ys: Vec<f64> = values.iter().map(|v| v[j]).collect();
        let scale = 1.0 + ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
        let max_degree = if params.is_empty() { 0 } else { MAX_PARAM_DEGREE };
        for degree in 0..=max_degree {
            let monos = monomials(params.len(), degree);
            let v = DMatrix::from_fn(samples.len(), monos.len(), |r, c| {
                monos[c]
                    .iter()
                    .zip(&samples[r])
                    .map(|(e, p)| p.powi(*e as i32))
                    .product::<f64>()
            });
            let y = DVector::from_vec(ys.clone());
            let Ok(a) = v.clone().svd(true, true).solve(&y, 1e-14) else {
                continue;
            };
            let misfit = (&v * &a - &y).amax() / scale;
            if misfit > 1e-7 {
                continue;
            }
            let mut terms = Vec::new();
            for (mono, coef) in monos.iter().zip(a.iter()) {
                if coef.abs() < 1e-9 * scale {
                    continue;
                }
                let q = rationalize(*coef, 10_000, 1e-7)?;
                let mut factors = vec![Expr::num(q)];
                for (p, e) in params.iter().zip(mono) {
                    if *e > 0 {
                        factors.push(Expr::sym(p).powi(*e as i64));
                    }
                }
                terms.push(Expr::mul_all(factors));
            }
            out.push(Expr::add_all(terms).normalize().ok()?);
            continue 'coeff;
        }
        return None;
    }
    Some(out)
}

fn certify(
    x: &VectorField,
    basis: &FieldBasis,
    coefficients: &[Expr],
    ctx: &Context,
    cfg: &SamplingConfig,
) -> Result<bool, FieldError> {
    let mut combo = VectorField::zero(x.dim());
    for (c, f) in coefficients.iter().zip(basis.fields()) {
        combo = combo.add(&f.scale(c));
    }
    for (a, b) in x.components().iter().zip(combo.components()) {
        if !is_zero(&(a - &b), ctx, cfg)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Named linear combination, e.g. `2*X1 + (alpha - sigma^2/2)*X3`.
pub fn format_combination(names: &[&str], coefficients: &[Expr]) -> String {
    let mut parts = Vec::new();
    for (n, c) in names.iter().zip(coefficients) {
        if c.is_literal_zero() {
            continue;
        }
        if c.is_literal_one() {
            parts.push(n.to_string());
        } else if c.as_num().is_some_and(|q| !q.is_negative()) || matches!(c.node(), crate::expr::Node::Sym(_)) {
            parts.push(format!("{c}*{n}"));
        } else {
            parts.push(format!("({c})*{n}"));
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// Values of a field's components at a point, for diagnostics.
pub fn evaluate_components(x: &VectorField, point: &BTreeMap<String, f64>) -> Vec<Option<f64>> {
    let env = Env {
        vars: point.iter().map(|(k, v)| (k.clone(), *v)).collect(),
        ..Env::default()
    };
    x.components().iter().map(|e| eval_numeric(e, &env).ok()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn gbm_ctx() -> Context {
        Context::builder()
            .state("x")
            .param("alpha")
            .nonzero_param("sigma")
            .build()
            .unwrap()
    }

    fn field(ctx: &Context, tau: &str, xi: &str) -> VectorField {
        VectorField::new(parse(tau, ctx).unwrap(), vec![parse(xi, ctx).unwrap()])
    }

    fn gbm_basis(ctx: &Context) -> FieldBasis {
        let mut b = FieldBasis::new();
        b.push("X1", field(ctx, "1", "0"));
        b.push("X2", field(ctx, "2*t", "(alpha - sigma^2/2)*t*x + x*ln(x)"));
        b.push("X3", field(ctx, "0", "x"));
        b
    }

    #[test]
    fn simple_bracket() {
        let ctx = gbm_ctx();
        let b = lie_bracket(&field(&ctx, "1", "0"), &field(&ctx, "2*t", "x"), &ctx).unwrap();
        assert_eq!(b.tau, Expr::int(2));
        assert!(b.xi[0].is_literal_zero());
    }

    #[test]
    fn gbm_bracket_in_span() {
        let ctx = gbm_ctx();
        let basis = gbm_basis(&ctx);
        let br = lie_bracket(basis.get("X1").unwrap(), basis.get("X2").unwrap(), &ctx).unwrap();
        let res = span_membership(&br, &basis, &ctx, &SamplingConfig::default()).unwrap();
        let SpanResult::InSpan {
            coefficients,
            certified,
            ..
        } = res
        else {
            panic!("not in span: {res:?}");
        };
        assert!(certified);
        assert_eq!(coefficients[0], Expr::int(2));
        assert!(coefficients[1].is_literal_zero());
        let expected = parse("alpha - sigma^2/2", &ctx).unwrap();
        assert!((&coefficients[2] - &expected).is_zero_canonical().unwrap());
    }

    #[test]
    fn not_in_span() {
        let ctx = gbm_ctx();
        let mut basis = FieldBasis::new();
        basis.push("T", field(&ctx, "1", "0"));
        let res = span_membership(&field(&ctx, "0", "1"), &basis, &ctx, &SamplingConfig::default()).unwrap();
        assert!(matches!(res, SpanResult::NotInSpan { .. }));
    }

    #[test]
    fn mod_x0() {
        let ctx = gbm_ctx();
        let cfg = SamplingConfig::default();
        let a = field(&ctx, "t", "x").with_multiplier(parse("ln(x) + 1", &ctx).unwrap());
        let b = field(&ctx, "t", "x").with_multiplier(parse("ln(x) + 3", &ctx).unwrap());
        assert_eq!(equals_mod_x0(&a, &a, &ctx, &cfg).unwrap(), ModX0::Equal { c: Rational::zero() });
        assert_eq!(
            equals_mod_x0(&a, &b, &ctx, &cfg).unwrap(),
            ModX0::Equal {
                c: Rational::from_integer((-2).into())
            }
        );
        let c = field(&ctx, "t", "2*x");
        assert!(matches!(equals_mod_x0(&a, &c, &ctx, &cfg).unwrap(), ModX0::Mismatch { .. }));
    }

    #[test]
    fn rationalize_recovers_small_fractions() {
        assert_eq!(rationalize(-0.5, 100, 1e-12), Some(Rational::new((-1).into(), 2.into())));
        assert_eq!(rationalize(1.0 / 3.0, 100, 1e-12), Some(Rational::new(1.into(), 3.into())));
        assert_eq!(rationalize(std::f64::consts::PI, 100, 1e-12), None);
    }

    #[test]
    fn bracket_with_multipliers() {
        let ctx = gbm_ctx();
        let x = field(&ctx, "1", "0");
        let y = field(&ctx, "0", "t").with_multiplier(parse("x*t", &ctx).unwrap());
        let b = lie_bracket(&x, &y, &ctx).unwrap();
        assert_eq!(b.xi[0], Expr::one());
        assert_eq!(b.multiplier.unwrap(), Expr::sym("x"));
    }
}
