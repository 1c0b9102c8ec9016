use std::collections::HashMap;
use std::hash::Hasher;
use std::sync::Arc;

use num_traits::ToPrimitive;

use super::{AtomApp, Expr, Func, Node, Rational};

/// Numeric stand-in for a function atom: `(orders, args) -> value`.
pub type AtomFn = Arc<dyn Fn(&[u32], &[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("symbol `{0}` has no value")]
    Unbound(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("division by zero")]
    DivisionByZero,
}

/// Point of evaluation: symbol values plus atom closures.
///
/// Atoms without a closure evaluate to a deterministic pseudo-random value
/// in `[0.5, 2]` keyed by name, derivative orders, arguments and `atom_seed`,
/// so distinct derivatives behave as independent functions.
#[derive(Clone, Default)]
pub struct Env {
    pub vars: HashMap<String, f64>,
    pub atoms: HashMap<String, AtomFn>,
    pub atom_seed: u64,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn with_var(mut self, name: &str, value: f64) -> Env {
        self.vars.insert(name.to_string(), value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.vars.insert(name.to_string(), value);
    }

    pub fn with_atom(mut self, name: &str, f: AtomFn) -> Env {
        self.atoms.insert(name.to_string(), f);
        self
    }
}

impl std::fmt::Debug for Env {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut atoms: Vec<&String> = self.atoms.keys().collect();
        atoms.sort();
        f.debug_struct("Env")
            .field("vars", &self.vars)
            .field("atoms", &atoms)
            .field("atom_seed", &self.atom_seed)
            .finish()
    }
}

pub fn eval_numeric(e: &Expr, env: &Env) -> Result<f64, EvalError> {
    let v = eval(e, env)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Domain(format!("non-finite value in `{e}`")))
    }
}

fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn eval(e: &Expr, env: &Env) -> Result<f64, EvalError> {
    Ok(match e.node() {
        Node::Num(q) => rational_to_f64(q),
        Node::Sym(s) => *env
            .vars
            .get(&**s)
            .ok_or_else(|| EvalError::Unbound(s.to_string()))?,
        Node::Add(ts) => {
            let mut acc = 0.0;
            for t in ts {
                acc += eval(t, env)?;
            }
            acc
        }
        Node::Mul(fs) => {
            let mut acc = 1.0;
            for x in fs {
                acc *= eval(x, env)?;
            }
            acc
        }
        Node::Pow(b, q) => {
            let base = eval(b, env)?;
            if q.is_integer() {
                let k = q.to_integer().to_i32().ok_or_else(|| EvalError::Domain("exponent too large".into()))?;
                if base == 0.0 && k < 0 {
                    return Err(EvalError::DivisionByZero);
                }
                base.powi(k)
            } else {
                if base < 0.0 {
                    return Err(EvalError::Domain(format!("fractional power of negative base {base}")));
                }
                if base == 0.0 && rational_to_f64(q) < 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                base.powf(rational_to_f64(q))
            }
        }
        Node::Div(a, b) => {
            let d = eval(b, env)?;
            if d == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            eval(a, env)? / d
        }
        Node::Func(f, a) => {
            let x = eval(a, env)?;
            match f {
                Func::Ln if x <= 0.0 => return Err(EvalError::Domain(format!("ln of {x}"))),
                Func::Ln => x.ln(),
                Func::Exp => x.exp(),
                Func::Sqrt if x < 0.0 => return Err(EvalError::Domain(format!("sqrt of {x}"))),
                Func::Sqrt => x.sqrt(),
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
            }
        }
        Node::Atom(app) => {
            let args = app.args.iter().map(|a| eval(a, env)).collect::<Result<Vec<_>, _>>()?;
            match env.atoms.get(&*app.name) {
                Some(f) => f(&app.orders, &args),
                None => generic_atom(app, &args, env.atom_seed),
            }
        }
    })
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn generic_atom(app: &AtomApp, args: &[f64], seed: u64) -> f64 {
    // FNV-style fold feeding splitmix; args quantized to absorb rounding.
    struct Fold(u64);
    impl Hasher for Fold {
        fn finish(&self) -> u64 {
            self.0
        }
        fn write(&mut self, bytes: &[u8]) {
            for b in bytes {
                self.0 = splitmix(self.0 ^ u64::from(*b));
            }
        }
    }
    let mut h = Fold(splitmix(seed));
    h.write(app.name.as_bytes());
    for o in &app.orders {
        h.write_u32(*o);
    }
    for a in args {
        h.write_i64((a * 1e9).round() as i64);
    }
    let unit = (h.finish() >> 11) as f64 / (1u64 << 53) as f64;
    0.5 + 1.5 * unit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Context};

    fn ctx() -> Context {
        Context::builder()
            .state("x")
            .param("alpha")
            .atom("F", &["x"], None)
            .build()
            .unwrap()
    }

    #[test]
    fn basic_values() {
        let c = ctx();
        let env = Env::new().with_var("x", 3.0).with_var("alpha", 2.0);
        assert_eq!(eval_numeric(&parse("x^2", &c).unwrap(), &env).unwrap(), 9.0);
        let env = Env::new().with_var("x", 0.5).with_var("alpha", 2.0);
        assert_eq!(eval_numeric(&parse("alpha*x", &c).unwrap(), &env).unwrap(), 1.0);
    }

    #[test]
    fn domain_errors() {
        let c = ctx();
        let env = Env::new().with_var("x", 0.0);
        assert_eq!(
            eval_numeric(&parse("1/x", &c).unwrap(), &env),
            Err(EvalError::DivisionByZero)
        );
        assert!(matches!(
            eval_numeric(&parse("ln(x)", &c).unwrap(), &env),
            Err(EvalError::Domain(_))
        ));
        assert!(matches!(
            eval_numeric(&parse("alpha", &c).unwrap(), &env),
            Err(EvalError::Unbound(_))
        ));
    }

    #[test]
    fn generic_atoms_are_deterministic_and_distinct() {
        let c = ctx();
        let env = Env::new().with_var("x", 1.25);
        let f = parse("F(x)", &c).unwrap();
        let fp = parse("F'(x)", &c).unwrap();
        let a = eval_numeric(&f, &env).unwrap();
        assert_eq!(a, eval_numeric(&f, &env).unwrap());
        assert!((0.5..=2.0).contains(&a));
        assert_ne!(a, eval_numeric(&fp, &env).unwrap());
    }

    #[test]
    fn closures_override() {
        let c = ctx();
        let env = Env::new()
            .with_var("x", 2.0)
            .with_atom("F", Arc::new(|_, a: &[f64]| a[0] * 10.0));
        assert_eq!(eval_numeric(&parse("F(x)", &c).unwrap(), &env).unwrap(), 20.0);
    }
}
