use std::fmt::{self, Display, Formatter, Write};

use num_traits::{One, Signed};

use super::{AtomApp, Expr, Node, Rational};

// Binding levels: sum < product/quotient < power operand < primary.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const FACTOR: u8 = 3;
const PRIMARY: u8 = 4;

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

fn level(e: &Expr) -> u8 {
    match e.node() {
        Node::Num(q) => {
            if q.is_negative() {
                SUM
            } else if q.is_integer() {
                PRIMARY
            } else {
                PRODUCT
            }
        }
        Node::Sym(_) | Node::Func(..) | Node::Atom(_) => PRIMARY,
        Node::Add(_) => SUM,
        Node::Mul(fs) => {
            if leading_coeff(fs).is_some_and(|c| c.is_negative()) {
                SUM
            } else {
                PRODUCT
            }
        }
        Node::Div(..) => PRODUCT,
        Node::Pow(..) => FACTOR,
    }
}

fn leading_coeff(fs: &[Expr]) -> Option<&Rational> {
    fs.first().and_then(Expr::as_num)
}

fn write_expr(f: &mut Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if level(e) < min {
        f.write_char('(')?;
        write_bare(f, e)?;
        return f.write_char(')');
    }
    write_bare(f, e)
}

fn write_rational(f: &mut Formatter<'_>, q: &Rational) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

fn write_bare(f: &mut Formatter<'_>, e: &Expr) -> fmt::Result {
    match e.node() {
        Node::Num(q) => write_rational(f, q),
        Node::Sym(s) => f.write_str(s),
        Node::Add(ts) => {
            for (i, t) in ts.iter().enumerate() {
                if i == 0 {
                    write_expr(f, t, SUM)?;
                } else if let Some(neg) = negated(t) {
                    f.write_str(" - ")?;
                    write_expr(f, &neg, PRODUCT)?;
                } else {
                    f.write_str(" + ")?;
                    write_expr(f, t, PRODUCT)?;
                }
            }
            Ok(())
        }
        Node::Mul(fs) => {
            let mut rest = &fs[..];
            if let Some(c) = leading_coeff(fs) {
                if c.is_negative() {
                    f.write_char('-')?;
                    let abs = -c;
                    rest = &fs[1..];
                    if !abs.is_one() {
                        write_expr(f, &Expr::num(abs), FACTOR)?;
                        f.write_char('*')?;
                    }
                }
            }
            for (i, x) in rest.iter().enumerate() {
                if i > 0 {
                    f.write_char('*')?;
                }
                write_expr(f, x, FACTOR)?;
            }
            Ok(())
        }
        Node::Div(a, b) => {
            write_expr(f, a, PRODUCT)?;
            f.write_char('/')?;
            write_expr(f, b, FACTOR)
        }
        Node::Pow(b, q) => {
            write_expr(f, b, PRIMARY)?;
            f.write_char('^')?;
            if q.is_integer() && !q.is_negative() {
                write_rational(f, q)
            } else {
                f.write_char('(')?;
                write_rational(f, q)?;
                f.write_char(')')
            }
        }
        Node::Func(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a, 0)?;
            f.write_char(')')
        }
        Node::Atom(app) => write_atom(f, app),
    }
}

fn write_atom(f: &mut Formatter<'_>, app: &AtomApp) -> fmt::Result {
    f.write_str(&app.name)?;
    if app.total_order() > 0 {
        if app.orders.len() == 1 {
            for _ in 0..app.orders[0] {
                f.write_char('\'')?;
            }
        } else {
            f.write_str("'[")?;
            for (i, o) in app.orders.iter().enumerate() {
                if i > 0 {
                    f.write_char(',')?;
                }
                write!(f, "{o}")?;
            }
            f.write_char(']')?;
        }
    }
    f.write_char('(')?;
    for (i, a) in app.args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write_expr(f, a, 0)?;
    }
    f.write_char(')')
}

/// `-t` when `t` prints with a leading minus sign.
fn negated(t: &Expr) -> Option<Expr> {
    match t.node() {
        Node::Num(q) if q.is_negative() => Some(Expr::num(-q)),
        Node::Mul(fs) if leading_coeff(fs).is_some_and(|c| c.is_negative()) => {
            Some(Expr::mul_all(fs.iter().cloned().chain([Expr::int(-1)])))
        }
        _ => None,
    }
}
