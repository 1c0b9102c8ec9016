use super::{AtomApp, Context, Expr, ExprError, Func, Node, ATOM_DEPTH_LIMIT};

pub(super) fn differentiate(e: &Expr, var: &str, ctx: &Context) -> Result<Expr, ExprError> {
    if !e.contains_symbol(var) {
        return Ok(Expr::zero());
    }
    Ok(match e.node() {
        Node::Num(_) => Expr::zero(),
        Node::Sym(s) => {
            if &**s == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Add(ts) => Expr::add_all(
            ts.iter()
                .map(|t| differentiate(t, var, ctx))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        Node::Mul(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for (i, f) in fs.iter().enumerate() {
                let df = differentiate(f, var, ctx)?;
                if df.is_literal_zero() {
                    continue;
                }
                let mut factors: Vec<Expr> = Vec::with_capacity(fs.len());
                factors.extend(fs[..i].iter().cloned());
                factors.push(df);
                factors.extend(fs[i + 1..].iter().cloned());
                terms.push(Expr::mul_all(factors));
            }
            Expr::add_all(terms)
        }
        Node::Pow(b, q) => {
            let db = differentiate(b, var, ctx)?;
            let reduced = q - super::Rational::from_integer(1.into());
            Expr::mul_all([Expr::num(q.clone()), b.pow(reduced), db])
        }
        Node::Div(a, b) => {
            let da = differentiate(a, var, ctx)?;
            let db = differentiate(b, var, ctx)?;
            (da * b.clone() - a.clone() * db).div(&b.powi(2))
        }
        Node::Func(f, a) => {
            let da = differentiate(a, var, ctx)?;
            let outer = match f {
                Func::Ln => Expr::one().div(a),
                Func::Exp => e.clone(),
                Func::Sqrt => Expr::one().div(&(Expr::int(2) * e.clone())),
                Func::Sin => Expr::func(Func::Cos, a.clone()),
                Func::Cos => -Expr::func(Func::Sin, a.clone()),
            };
            outer * da
        }
        Node::Atom(app) => {
            let mut terms = Vec::new();
            for (k, arg) in app.args.iter().enumerate() {
                let darg = differentiate(arg, var, ctx)?;
                if darg.is_literal_zero() {
                    continue;
                }
                terms.push(atom_partial(app, k, ctx)? * darg);
            }
            Expr::add_all(terms)
        }
    })
}

/// Partial derivative of an atom application with respect to argument `k`.
fn atom_partial(app: &AtomApp, k: usize, ctx: &Context) -> Result<Expr, ExprError> {
    ctx.check_arity(&app.name, app.args.len())?;
    if let Some(atom) = ctx.atom(&app.name) {
        if let (Some(rule), 0) = (&atom.rule, app.total_order()) {
            return Ok(rule.substitute_one(&atom.args[0], &app.args[0]));
        }
    }
    let mut orders = app.orders.clone();
    orders[k] += 1;
    if orders.iter().sum::<u32>() > ATOM_DEPTH_LIMIT {
        return Err(ExprError::AtomDepth(app.name.to_string()));
    }
    Ok(Expr::atom_app(AtomApp {
        name: app.name.clone(),
        orders,
        args: app.args.clone(),
    }))
}
