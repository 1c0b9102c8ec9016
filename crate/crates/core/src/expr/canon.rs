//! Canonical form: a reduced quotient of polynomials over the generator set.
//!
//! Numerator and denominator are coprime (multivariate GCD over Q), the
//! denominator's leading coefficient is one, and radical generators carry
//! exponents below their index. For radical-free inputs two expressions are
//! equal as rational functions over independent generators iff their
//! canonical forms are structurally equal.

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::{gcd, Gen, GenKind, Monomial, Poly};
use super::{exact_root, AtomApp, Expr, ExprError, Func, Node, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn zero() -> RatFunc {
        RatFunc::from_poly(Poly::zero())
    }

    pub fn one() -> RatFunc {
        RatFunc::from_poly(Poly::one())
    }

    pub fn constant(c: Rational) -> RatFunc {
        RatFunc::from_poly(Poly::constant(c))
    }

    pub fn from_poly(p: Poly) -> RatFunc {
        RatFunc {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn gen(g: Gen) -> RatFunc {
        RatFunc::from_poly(Poly::gen(g))
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    /// Builds `num/den` in canonical form.
    pub fn new(num: Poly, den: Poly) -> Result<RatFunc, ExprError> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        let (num, den) = reduce_roots(num, den);
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatFunc::zero());
        }
        let (num, den) = if den.as_constant().is_some() {
            (num, den)
        } else {
            let g = gcd(&num, &den);
            if g.is_one() {
                (num, den)
            } else {
                (
                    num.exact_div(&g).expect("gcd divides numerator"),
                    den.exact_div(&g).expect("gcd divides denominator"),
                )
            }
        };
        let lc = den.leading().map(|(_, c)| c.clone()).unwrap();
        if lc.is_one() {
            Ok(RatFunc { num, den })
        } else {
            let inv = lc.recip();
            Ok(RatFunc {
                num: num.scale(&inv),
                den: den.scale(&inv),
            })
        }
    }

    /// Sum of reduced fractions; only the shared denominator factor is
    /// searched for cancellations.
    pub fn add(&self, other: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            return RatFunc::new(self.num.add(&other.num), self.den.clone()).expect("nonzero den");
        }
        let g = gcd(&self.den, &other.den);
        if g.is_one() {
            let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
            return RatFunc::coprime(num, self.den.mul(&other.den));
        }
        let da = exact(&self.den, &g);
        let db = exact(&other.den, &g);
        let num = self.num.mul(&db).add(&other.num.mul(&da));
        if num.is_zero() {
            return RatFunc::zero();
        }
        let h = gcd(&num, &g);
        if h.is_one() {
            RatFunc::coprime(num, da.mul(&other.den))
        } else {
            RatFunc::coprime(exact(&num, &h), da.mul(&exact(&other.den, &h)))
        }
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        if self.is_zero() || other.is_zero() {
            return RatFunc::zero();
        }
        let g1 = gcd(&self.num, &other.den);
        let g2 = gcd(&other.num, &self.den);
        RatFunc::coprime(
            exact(&self.num, &g1).mul(&exact(&other.num, &g2)),
            exact(&self.den, &g2).mul(&exact(&other.den, &g1)),
        )
    }

    /// `num/den` for coprime parts; falls back to full reduction when a
    /// root power needs rewriting.
    fn coprime(num: Poly, den: Poly) -> RatFunc {
        if reducible_root(&num).is_some() || reducible_root(&den).is_some() {
            return RatFunc::new(num, den).expect("nonzero den");
        }
        if num.is_zero() {
            return RatFunc::zero();
        }
        let lc = den.leading().map(|(_, c)| c.clone()).expect("nonzero den");
        if lc.is_one() {
            RatFunc { num, den }
        } else {
            let inv = lc.recip();
            RatFunc {
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }

    pub fn recip(&self) -> Result<RatFunc, ExprError> {
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &RatFunc) -> Result<RatFunc, ExprError> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn powi(&self, k: i64) -> Result<RatFunc, ExprError> {
        let base = if k < 0 { self.recip()? } else { self.clone() };
        let k = k.unsigned_abs() as u32;
        RatFunc::new(base.num.pow(k), base.den.pow(k))
    }

    /// Converts back to an expression tree: `num` or `num/den`.
    pub fn to_expr(&self) -> Expr {
        let n = poly_to_expr(&self.num);
        if self.den.is_one() {
            n
        } else {
            Expr::from_node(Node::Div(n, poly_to_expr(&self.den)))
        }
    }

    /// Splits off the largest factor that depends on `params` only.
    ///
    /// Returns `(factor, cofactor)` with `self = factor * cofactor` when the
    /// factor is non-constant.
    pub fn parameter_factor(&self, params: &[&str]) -> Option<(Poly, RatFunc)> {
        if self.is_zero() || params.is_empty() {
            return None;
        }
        let is_param = |g: &Gen| g.sym_name().is_some_and(|s| params.contains(&s));
        let mut groups: std::collections::BTreeMap<Monomial, Poly> = Default::default();
        for (m, c) in self.num.terms() {
            let mut p_part = Monomial::one();
            let mut rest = Monomial::one();
            for (g, e) in m.factors() {
                let single = Monomial::gen(g.clone(), *e);
                if is_param(g) {
                    p_part = p_part.mul(&single);
                } else {
                    rest = rest.mul(&single);
                }
            }
            let entry = groups.entry(rest).or_default();
            *entry = entry.add(&Poly::term(p_part, c.clone()));
        }
        let mut factor = Poly::zero();
        for p in groups.values() {
            factor = gcd(&factor, p);
            if factor.is_one() {
                return None;
            }
        }
        if factor.as_constant().is_some() {
            return None;
        }
        let cof = RatFunc::new(self.num.exact_div(&factor)?, self.den.clone()).ok()?;
        Some((factor, cof))
    }
}

fn gen_to_expr(g: &Gen) -> Expr {
    match g.kind() {
        GenKind::Sym(s) => Expr::from_node(Node::Sym(s.clone())),
        GenKind::Func(f, a) => Expr::from_node(Node::Func(*f, a.to_expr())),
        GenKind::Root(r, 2) => Expr::from_node(Node::Func(Func::Sqrt, r.to_expr())),
        GenKind::Root(r, q) => Expr::from_node(Node::Pow(
            r.to_expr(),
            Rational::new(1.into(), (*q).into()),
        )),
        GenKind::Atom(name, orders, args) => Expr::atom_app(AtomApp {
            name: name.clone(),
            orders: orders.clone(),
            args: args.iter().map(RatFunc::to_expr).collect(),
        }),
    }
}

fn monomial_to_factors(m: &Monomial) -> Vec<Expr> {
    m.factors()
        .iter()
        .rev()
        .map(|(g, e)| {
            let b = gen_to_expr(g);
            if *e == 1 {
                b
            } else {
                Expr::from_node(Node::Pow(b, Rational::from_integer((*e).into())))
            }
        })
        .collect()
}

fn poly_to_expr(p: &Poly) -> Expr {
    let terms: Vec<Expr> = p
        .terms()
        .rev()
        .map(|(m, c)| {
            let mut factors = monomial_to_factors(m);
            if factors.is_empty() {
                return Expr::num(c.clone());
            }
            if !c.is_one() {
                factors.insert(0, Expr::num(c.clone()));
            }
            if factors.len() == 1 {
                factors.pop().unwrap()
            } else {
                Expr::from_node(Node::Mul(factors))
            }
        })
        .collect();
    match terms.len() {
        0 => Expr::zero(),
        1 => terms.into_iter().next().unwrap(),
        _ => Expr::from_node(Node::Add(terms)),
    }
}

/// Replaces `root^index` by the radicand in numerator and denominator.
fn exact(p: &Poly, d: &Poly) -> Poly {
    if d.is_one() {
        p.clone()
    } else {
        p.exact_div(d).expect("gcd divides")
    }
}

fn reduce_roots(mut num: Poly, mut den: Poly) -> (Poly, Poly) {
    loop {
        let Some((g, radicand, index)) = reducible_root(&num).or_else(|| reducible_root(&den)) else {
            return (num, den);
        };
        let (n_new, n_factor) = reduce_once(&num, &g, &radicand, index);
        let (d_new, d_factor) = reduce_once(&den, &g, &radicand, index);
        // num/den = (n_new/n_factor) / (d_new/d_factor)
        num = n_new.mul(&d_factor);
        den = d_new.mul(&n_factor);
    }
}

fn reducible_root(p: &Poly) -> Option<(Gen, RatFunc, u32)> {
    for (m, _) in p.terms() {
        for (g, e) in m.factors() {
            if let GenKind::Root(r, q) = g.kind() {
                if *e >= *q {
                    return Some((g.clone(), r.clone(), *q));
                }
            }
        }
    }
    None
}

/// Rewrites `p` as `new / factor` after one reduction pass of `g^index`.
fn reduce_once(p: &Poly, g: &Gen, radicand: &RatFunc, index: u32) -> (Poly, Poly) {
    let mut low = Poly::zero();
    let mut high = Poly::zero();
    for (m, c) in p.terms() {
        let (e, rest) = m.split(g);
        if e >= index {
            high = high.add(&Poly::term(rest.mul(&Monomial::gen(g.clone(), e - index)), c.clone()));
        } else {
            low = low.add(&Poly::term(m.clone(), c.clone()));
        }
    }
    if high.is_zero() {
        return (p.clone(), Poly::one());
    }
    (
        low.mul(radicand.denom()).add(&high.mul(radicand.numer())),
        radicand.denom().clone(),
    )
}

/// Canonical form of an expression.
pub fn canonical(e: &Expr) -> Result<RatFunc, ExprError> {
    Ok(match e.node() {
        Node::Num(q) => RatFunc::constant(q.clone()),
        Node::Sym(s) => RatFunc::gen(Gen::new(GenKind::Sym(s.clone()))),
        Node::Add(ts) => {
            let mut acc = RatFunc::zero();
            for t in ts {
                acc = acc.add(&canonical(t)?);
            }
            acc
        }
        Node::Mul(fs) => {
            let mut acc = RatFunc::one();
            for f in fs {
                acc = acc.mul(&canonical(f)?);
                if acc.is_zero() {
                    break;
                }
            }
            acc
        }
        Node::Div(a, b) => {
            let den = canonical(b)?;
            if den.is_zero() {
                return Err(ExprError::DivisionByZero);
            }
            canonical(a)?.div(&den)?
        }
        Node::Pow(b, q) => rational_power(&canonical(b)?, q)?,
        Node::Func(Func::Sqrt, a) => rational_power(&canonical(a)?, &Rational::new(1.into(), 2.into()))?,
        Node::Func(f, a) => {
            let arg = canonical(a)?;
            function(*f, arg)?
        }
        Node::Atom(app) => {
            let args = app.args.iter().map(canonical).collect::<Result<Vec<_>, _>>()?;
            RatFunc::gen(Gen::new(GenKind::Atom(app.name.clone(), app.orders.clone(), args)))
        }
    })
}

fn function(f: Func, arg: RatFunc) -> Result<RatFunc, ExprError> {
    if let Some(c) = arg.as_constant() {
        match f {
            Func::Ln if c.is_one() => return Ok(RatFunc::zero()),
            Func::Exp | Func::Cos if c.is_zero() => return Ok(RatFunc::one()),
            Func::Sin if c.is_zero() => return Ok(RatFunc::zero()),
            _ => {}
        }
    }
    if f == Func::Ln {
        // ln(g^k) -> k ln(g), ln(1/g^k) -> -k ln(g)
        let pure = |p: &Poly| -> Option<(Gen, u32)> {
            let (m, c) = p.terms().next()?;
            if p.len() != 1 || !c.is_one() || m.factors().len() != 1 {
                return None;
            }
            Some(m.factors()[0].clone())
        };
        if arg.den.is_one() {
            if let Some((g, k)) = pure(&arg.num) {
                if k > 1 {
                    let inner = RatFunc::gen(Gen::new(GenKind::Func(Func::Ln, RatFunc::gen(g))));
                    return Ok(inner.mul(&RatFunc::constant(Rational::from_integer(k.into()))));
                }
            }
        } else if arg.num.is_one() {
            if let Some((g, k)) = pure(&arg.den) {
                let inner = RatFunc::gen(Gen::new(GenKind::Func(Func::Ln, RatFunc::gen(g))));
                return Ok(inner.mul(&RatFunc::constant(-Rational::from_integer(k.into()))));
            }
        }
    }
    Ok(RatFunc::gen(Gen::new(GenKind::Func(f, arg))))
}

fn rational_power(base: &RatFunc, q: &Rational) -> Result<RatFunc, ExprError> {
    if q.is_integer() {
        let k = q.to_integer().to_i64().ok_or(ExprError::DivisionByZero)?;
        return base.powi(k);
    }
    let index = q.denom().to_u32().expect("small root index");
    let p = q.numer().to_i64().expect("small exponent");
    if let Some(c) = base.as_constant() {
        if c.is_zero() {
            return if p > 0 { Ok(RatFunc::zero()) } else { Err(ExprError::DivisionByZero) };
        }
        if !c.is_negative() {
            if let Some(r) = exact_root(&c, index) {
                return RatFunc::constant(r).powi(p);
            }
        }
    }
    // base^(p/q) = base^s * root^r with p = q*s + r, 0 <= r < q
    let s = p.div_euclid(index as i64);
    let r = p.rem_euclid(index as i64);
    let root = RatFunc::gen(Gen::new(GenKind::Root(base.clone(), index)));
    Ok(base.powi(s)?.mul(&root.powi(r)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Context};

    fn ctx() -> Context {
        Context::builder()
            .state("x")
            .state("y")
            .param("alpha")
            .param("sigma")
            .build()
            .unwrap()
    }

    fn c(s: &str) -> RatFunc {
        canonical(&parse(s, &ctx()).unwrap()).unwrap()
    }

    #[test]
    fn x_over_x_is_one() {
        assert_eq!(c("x/x"), RatFunc::one());
    }

    #[test]
    fn gbm_cancellation() {
        let r = c("(alpha - sigma^2/2)*t*x + x*ln(x) - x*ln(x) - alpha*t*x");
        assert_eq!(r, c("-sigma^2*t*x/2"));
    }

    #[test]
    fn transcendental_atoms_are_opaque() {
        let r = c("ln(x)*exp(t)");
        assert_eq!(r.numer().len(), 1);
        assert_eq!(r.numer().gens().len(), 2);
    }

    #[test]
    fn common_factor_cancels() {
        assert_eq!(c("(x^2 - y^2)/(x - y)"), c("x + y"));
        assert_eq!(c("(x*t + x)/(t^2 - 1)"), c("x/(t - 1)"));
    }

    #[test]
    fn division_by_zero_is_error() {
        let e = parse("x/(x - x)", &ctx()).unwrap();
        assert_eq!(canonical(&e), Err(ExprError::DivisionByZero));
    }

    #[test]
    fn radicals_reduce() {
        assert_eq!(c("sqrt(2)*sqrt(2)"), c("2"));
        assert_eq!(c("1/sqrt(2) - sqrt(2)/2"), RatFunc::zero());
        assert_eq!(c("x^(1/2)*x^(1/2)"), c("x"));
        assert_eq!(c("sqrt(9/4)"), c("3/2"));
    }

    #[test]
    fn log_power_rules() {
        assert_eq!(c("ln(x^2)"), c("2*ln(x)"));
        assert_eq!(c("ln(1/x)"), c("-ln(x)"));
        assert_eq!(c("ln(1)"), RatFunc::zero());
    }

    #[test]
    fn parameter_factor_extracted() {
        let ctx = Context::builder().state("x").param("A").build().unwrap();
        let r = canonical(&parse("(A - 1)*t/x^2 + (A-1)/x", &ctx).unwrap()).unwrap();
        let (f, cof) = r.parameter_factor(&["A"]).unwrap();
        assert_eq!(RatFunc::from_poly(f), canonical(&parse("A - 1", &ctx).unwrap()).unwrap());
        assert_eq!(cof, canonical(&parse("(t + x)/x^2", &ctx).unwrap()).unwrap());
        let r = canonical(&parse("A*t + x", &ctx).unwrap()).unwrap();
        assert!(r.parameter_factor(&["A"]).is_none());
    }

    #[test]
    fn normalize_is_idempotent_on_samples() {
        for s in [
            "(x+1)^3/(x^2-1)",
            "ln(x)*exp(t) + 1/sigma^2",
            "sqrt(2)*x + 1/sqrt(2)",
            "x^(2/3)*y",
        ] {
            let e = parse(s, &ctx()).unwrap();
            let n1 = e.normalize().unwrap();
            let n2 = n1.normalize().unwrap();
            assert_eq!(n1, n2, "{s}");
        }
    }
}
