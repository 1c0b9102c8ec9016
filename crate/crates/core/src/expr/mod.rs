//! Symbolic expression kernel.
//!
//! [`Expr`] is an immutable, reference-counted tree over exact rationals,
//! symbols, elementary functions and declared function atoms. Trees are
//! built through smart constructors that do light local folding only; the
//! heavy lifting (expansion, cancellation, zero testing) happens in
//! [`canon`] and [`zero`].

pub mod canon;
mod context;
mod diff;
mod eval;
mod parse;
pub mod poly;
mod print;
pub mod zero;

use std::collections::{BTreeMap, BTreeSet};
use std::ops;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use context::{Context, ContextError, FunctionAtom, ParamDecl, SymbolRole, DEPENDENT};
pub use eval::{eval_numeric, AtomFn, Env, EvalError};
pub use parse::{parse, parse_lenient, ParseError};
pub use zero::{is_zero, sample, Mode, SamplingConfig, Witness, ZeroError, ZeroVerdict};

pub type Rational = BigRational;

/// Maximum derivative order (or rule-rewrite depth) for function atoms.
pub const ATOM_DEPTH_LIMIT: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Ln,
    Exp,
    Sqrt,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Ln => "ln",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "ln" => Func::Ln,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }
}

/// Application of a declared function atom, possibly differentiated.
///
/// `orders[k]` counts partial derivatives taken with respect to argument `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AtomApp {
    pub name: Arc<str>,
    pub orders: Vec<u32>,
    pub args: Vec<Expr>,
}

impl AtomApp {
    pub fn total_order(&self) -> u32 {
        self.orders.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Num(Rational),
    Sym(Arc<str>),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, Rational),
    Div(Expr, Expr),
    Func(Func, Expr),
    Atom(AtomApp),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Node>);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("division by an identically zero denominator")]
    DivisionByZero,
    #[error("function atom `{0}` exceeds the derivative depth bound of {ATOM_DEPTH_LIMIT}")]
    AtomDepth(String),
    #[error("function atom `{name}` expects {expected} argument(s), got {got}")]
    AtomArity {
        name: String,
        expected: usize,
        got: usize,
    },
}

fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn from_node(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn zero() -> Expr {
        Expr::num(Rational::zero())
    }

    pub fn one() -> Expr {
        Expr::num(Rational::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::num(rat(n))
    }

    pub fn frac(n: i64, d: i64) -> Expr {
        Expr::num(Rational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn num(q: Rational) -> Expr {
        Expr::from_node(Node::Num(q))
    }

    pub fn sym(name: &str) -> Expr {
        Expr::from_node(Node::Sym(Arc::from(name)))
    }

    pub fn as_num(&self) -> Option<&Rational> {
        match self.node() {
            Node::Num(q) => Some(q),
            _ => None,
        }
    }

    /// Structural check for the literal zero; use [`Expr::is_zero_canonical`]
    /// for a semantic test.
    pub fn is_literal_zero(&self) -> bool {
        self.as_num().is_some_and(|q| q.is_zero())
    }

    pub fn is_literal_one(&self) -> bool {
        self.as_num().is_some_and(|q| q.is_one())
    }

    /// True when the canonical form is exactly zero.
    pub fn is_zero_canonical(&self) -> Result<bool, ExprError> {
        Ok(canon::canonical(self)?.is_zero())
    }

    pub fn add_all<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut out = Vec::new();
        let mut constant = Rational::zero();
        for t in terms {
            match t.node() {
                Node::Num(q) => constant += q,
                Node::Add(inner) => {
                    for s in inner {
                        match s.node() {
                            Node::Num(q) => constant += q,
                            _ => out.push(s.clone()),
                        }
                    }
                }
                _ => out.push(t),
            }
        }
        if !constant.is_zero() {
            out.push(Expr::num(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::from_node(Node::Add(out)),
        }
    }

    pub fn mul_all<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut out = Vec::new();
        let mut coeff = Rational::one();
        for f in factors {
            match f.node() {
                Node::Num(q) => coeff *= q,
                Node::Mul(inner) => {
                    for s in inner {
                        match s.node() {
                            Node::Num(q) => coeff *= q,
                            _ => out.push(s.clone()),
                        }
                    }
                }
                _ => out.push(f),
            }
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        if !coeff.is_one() || out.is_empty() {
            out.insert(0, Expr::num(coeff));
        }
        match out.len() {
            1 => out.pop().unwrap(),
            _ => Expr::from_node(Node::Mul(out)),
        }
    }

    pub fn pow(&self, exponent: Rational) -> Expr {
        if exponent.is_zero() {
            return Expr::one();
        }
        if exponent.is_one() {
            return self.clone();
        }
        if let Node::Num(base) = self.node() {
            if exponent.is_integer() {
                if let Some(k) = exponent.to_integer().to_i32() {
                    if !(base.is_zero() && k < 0) {
                        return Expr::num(rat_pow(base, k));
                    }
                }
            }
        }
        if let Node::Pow(inner, e) = self.node() {
            if e.is_integer() && exponent.is_integer() {
                return inner.pow(e * &exponent);
            }
        }
        Expr::from_node(Node::Pow(self.clone(), exponent))
    }

    pub fn powi(&self, k: i64) -> Expr {
        self.pow(rat(k))
    }

    pub fn div(&self, den: &Expr) -> Expr {
        if den.is_literal_one() {
            return self.clone();
        }
        if let (Node::Num(a), Node::Num(b)) = (self.node(), den.node()) {
            if !b.is_zero() {
                return Expr::num(a / b);
            }
        }
        if self.is_literal_zero() && !den.is_literal_zero() {
            return Expr::zero();
        }
        Expr::from_node(Node::Div(self.clone(), den.clone()))
    }

    pub fn func(f: Func, arg: Expr) -> Expr {
        match (f, arg.node()) {
            (Func::Ln, Node::Num(q)) if q.is_one() => Expr::zero(),
            // ln(b^k) -> k ln(b) for literal integer k
            (Func::Ln, Node::Pow(base, k)) if k.is_integer() => {
                Expr::num(k.clone()) * Expr::func(Func::Ln, base.clone())
            }
            (Func::Exp, Node::Num(q)) if q.is_zero() => Expr::one(),
            (Func::Sin, Node::Num(q)) if q.is_zero() => Expr::zero(),
            (Func::Cos, Node::Num(q)) if q.is_zero() => Expr::one(),
            (Func::Sqrt, Node::Num(q)) if !q.is_negative() => match exact_root(q, 2) {
                Some(r) => Expr::num(r),
                None => Expr::from_node(Node::Func(f, arg)),
            },
            _ => Expr::from_node(Node::Func(f, arg)),
        }
    }

    pub fn ln(&self) -> Expr {
        Expr::func(Func::Ln, self.clone())
    }

    pub fn exp(&self) -> Expr {
        Expr::func(Func::Exp, self.clone())
    }

    pub fn sqrt(&self) -> Expr {
        Expr::func(Func::Sqrt, self.clone())
    }

    pub fn atom(name: &str, args: Vec<Expr>) -> Expr {
        let orders = vec![0; args.len()];
        Expr::atom_app(AtomApp {
            name: Arc::from(name),
            orders,
            args,
        })
    }

    pub fn atom_app(app: AtomApp) -> Expr {
        Expr::from_node(Node::Atom(app))
    }

    /// Simultaneous substitution of symbols; inserted subtrees are not revisited.
    pub fn substitute(&self, bindings: &BTreeMap<String, Expr>) -> Expr {
        if bindings.is_empty() {
            return self.clone();
        }
        match self.node() {
            Node::Num(_) => self.clone(),
            Node::Sym(s) => bindings.get(&**s).cloned().unwrap_or_else(|| self.clone()),
            Node::Add(ts) => Expr::add_all(ts.iter().map(|t| t.substitute(bindings))),
            Node::Mul(fs) => Expr::mul_all(fs.iter().map(|f| f.substitute(bindings))),
            Node::Pow(b, e) => b.substitute(bindings).pow(e.clone()),
            Node::Div(a, b) => a.substitute(bindings).div(&b.substitute(bindings)),
            Node::Func(f, a) => Expr::func(*f, a.substitute(bindings)),
            Node::Atom(app) => Expr::atom_app(AtomApp {
                name: app.name.clone(),
                orders: app.orders.clone(),
                args: app.args.iter().map(|a| a.substitute(bindings)).collect(),
            }),
        }
    }

    pub fn substitute_one(&self, name: &str, value: &Expr) -> Expr {
        let mut b = BTreeMap::new();
        b.insert(name.to_string(), value.clone());
        self.substitute(&b)
    }

    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Num(_) => {}
            Node::Sym(s) => {
                out.insert(s.to_string());
            }
            Node::Add(v) | Node::Mul(v) => v.iter().for_each(|e| e.collect_symbols(out)),
            Node::Pow(b, _) => b.collect_symbols(out),
            Node::Div(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            Node::Func(_, a) => a.collect_symbols(out),
            Node::Atom(app) => app.args.iter().for_each(|e| e.collect_symbols(out)),
        }
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        match self.node() {
            Node::Num(_) => false,
            Node::Sym(s) => &**s == name,
            Node::Add(v) | Node::Mul(v) => v.iter().any(|e| e.contains_symbol(name)),
            Node::Pow(b, _) => b.contains_symbol(name),
            Node::Div(a, b) => a.contains_symbol(name) || b.contains_symbol(name),
            Node::Func(_, a) => a.contains_symbol(name),
            Node::Atom(app) => app.args.iter().any(|e| e.contains_symbol(name)),
        }
    }

    /// Names of function atoms applied anywhere in the tree.
    pub fn atom_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Node::Atom(app) = e.node() {
                out.insert(app.name.to_string());
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self.node() {
            Node::Num(_) | Node::Sym(_) => {}
            Node::Add(v) | Node::Mul(v) => v.iter().for_each(|e| e.visit(f)),
            Node::Pow(b, _) => b.visit(f),
            Node::Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Node::Func(_, a) => a.visit(f),
            Node::Atom(app) => app.args.iter().for_each(|e| e.visit(f)),
        }
    }

    /// Partial derivative with respect to the symbol `var`.
    pub fn differentiate(&self, var: &str, ctx: &Context) -> Result<Expr, ExprError> {
        diff::differentiate(self, var, ctx)
    }

    /// Canonical rational-function form, converted back to a tree.
    pub fn normalize(&self) -> Result<Expr, ExprError> {
        Ok(canon::canonical(self)?.to_expr())
    }
}

pub(crate) fn rat_pow(base: &Rational, k: i32) -> Rational {
    if k >= 0 {
        num_traits::pow(base.clone(), k as usize)
    } else {
        num_traits::pow(base.recip(), (-k) as usize)
    }
}

/// Exact `q`-th root of a non-negative rational, if it exists.
pub(crate) fn exact_root(value: &Rational, q: u32) -> Option<Rational> {
    if value.is_negative() {
        return None;
    }
    let n = value.numer();
    let d = value.denom();
    let rn = n.nth_root(q);
    let rd = d.nth_root(q);
    if num_traits::pow(rn.clone(), q as usize) == *n && num_traits::pow(rd.clone(), q as usize) == *d
    {
        Some(Rational::new(rn, rd))
    } else {
        None
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add_all([self, rhs])
    }
}

impl ops::Add<&Expr> for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add_all([self.clone(), rhs.clone()])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::add_all([self, -rhs])
    }
}

impl ops::Sub<&Expr> for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::add_all([self.clone(), -rhs.clone()])
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul_all([self, rhs])
    }
}

impl ops::Mul<&Expr> for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul_all([self.clone(), rhs.clone()])
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(&self, &rhs)
    }
}

impl ops::Div<&Expr> for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul_all([Expr::int(-1), self])
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul_all([Expr::int(-1), self.clone()])
    }
}

impl std::fmt::Debug for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Expr, D::Error> {
        let text = String::deserialize(d)?;
        parse_lenient(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Context {
        Context::builder()
            .state("x")
            .param("alpha")
            .param("sigma")
            .build()
            .unwrap()
    }

    #[test]
    fn constructors_fold_constants() {
        let e = Expr::int(2) + Expr::int(3);
        assert_eq!(e, Expr::int(5));
        assert_eq!(Expr::int(0) * Expr::sym("x"), Expr::zero());
        assert_eq!(Expr::sym("x").pow(rat(1)), Expr::sym("x"));
        assert_eq!(Expr::int(4).sqrt(), Expr::int(2));
    }

    #[test]
    fn ln_of_integer_power_is_rewritten() {
        let c = ctx();
        let e = parse("ln(x^3)", &c).unwrap();
        assert_eq!(e, Expr::int(3) * Expr::sym("x").ln());
    }

    #[test]
    fn substitution_is_simultaneous() {
        let x = Expr::sym("x");
        let t = Expr::sym("t");
        let mut b = BTreeMap::new();
        b.insert("x".to_string(), t.clone());
        b.insert("t".to_string(), x.clone());
        let e = (&x * &x) + t.clone();
        let s = e.substitute(&b);
        assert_eq!(s.normalize().unwrap(), (&t * &t + x).normalize().unwrap());
    }

    #[test]
    fn substitution_examples() {
        let c = Context::builder().state("x").param("A").build().unwrap();
        let sq = parse("x^2", &c).unwrap().substitute_one("x", &parse("t+1", &c).unwrap());
        let expected = parse("(t+1)^2", &c).unwrap();
        assert_eq!(sq, expected);

        let ax = parse("A/x", &c).unwrap().substitute_one("A", &Expr::one());
        assert_eq!(ax.normalize().unwrap(), parse("1/x", &c).unwrap().normalize().unwrap());

        let tau = Expr::atom("tau", vec![Expr::sym("t")]);
        assert_eq!(tau.substitute_one("x", &Expr::zero()), tau);
    }
}
