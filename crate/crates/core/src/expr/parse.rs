//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr     := term (("+" | "-") term)*
//! term     := unary (("*" | "/") unary)*
//! unary    := "-" unary | "+" unary | power
//! power    := primary ("^" exponent)?
//! exponent := "-" exponent | power                     (rational constant)
//! primary  := number | ident primes? ("(" expr ("," expr)* ")")? | "(" expr ")"
//! number   := integer | decimal
//! primes   := "'"+ | "'[" INT ("," INT)* "]"
//! ```
//!
//! Error positions are 1-based character columns.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::{AtomApp, Context, Expr, Func, Node, Rational, SymbolRole};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("undeclared identifier `{name}` at offset {offset}")]
    Undeclared { name: String, offset: usize },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Decimal(Rational),
    Ident(String),
    Op(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn lex(text: &str) -> Result<Lexer, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                let frac_start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let int_part: String = chars[start..frac_start - 1].iter().collect();
                let frac_part: String = chars[frac_start..i].iter().collect();
                let digits = format!("{int_part}{frac_part}");
                let numer: BigInt = if digits.is_empty() {
                    BigInt::zero()
                } else {
                    digits.parse().unwrap()
                };
                let denom = num_traits::pow(BigInt::from(10), frac_part.len());
                toks.push((Tok::Decimal(Rational::new(numer, denom)), pos));
            } else {
                let s: String = chars[start..i].iter().collect();
                toks.push((Tok::Int(s.parse().unwrap()), pos));
            }
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push((Tok::Ident(chars[start..i].iter().collect()), pos));
        } else if "+-*/^(),'[]".contains(c) {
            toks.push((Tok::Op(c), pos));
            i += 1;
        } else {
            return Err(ParseError::Syntax {
                offset: pos,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    toks.push((Tok::End, chars.len() + 1));
    Ok(Lexer { toks })
}

enum Scope<'a> {
    Declared(&'a Context),
    Lenient,
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    scope: Scope<'a>,
}

/// Parses `text`, requiring every identifier to be declared in `ctx`.
pub fn parse(text: &str, ctx: &Context) -> Result<Expr, ParseError> {
    run(text, Scope::Declared(ctx))
}

/// Parses without a context: bare identifiers become symbols and calls that
/// are not elementary functions become atoms. Used to read reports back.
pub fn parse_lenient(text: &str) -> Result<Expr, ParseError> {
    run(text, Scope::Lenient)
}

fn run(text: &str, scope: Scope<'_>) -> Result<Expr, ParseError> {
    let lexer = lex(text)?;
    let mut p = Parser {
        toks: lexer.toks,
        at: 0,
        scope,
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        _ => Err(p.error("unexpected trailing input")),
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, message: &str) -> ParseError {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Decimal(_) => "number".to_string(),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Op(c) => format!("`{c}`"),
        };
        ParseError::Syntax {
            offset: self.pos(),
            message: format!("{message}, found {found}"),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(-self.term()?);
            } else {
                break;
            }
        }
        Ok(Expr::add_all(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc * self.unary()?;
            } else if self.eat('/') {
                let den = self.unary()?;
                acc = acc.div(&den);
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(-self.unary()?)
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.eat('^') {
            let exp = self.exponent()?;
            Ok(base.pow(exp))
        } else {
            Ok(base)
        }
    }

    fn exponent(&mut self) -> Result<Rational, ParseError> {
        let start = self.pos();
        if self.eat('-') {
            return Ok(-self.exponent()?);
        }
        let e = self.power()?;
        match e.node() {
            Node::Num(q) => Ok(q.clone()),
            _ => Err(ParseError::Syntax {
                offset: start,
                message: "exponent must be a rational constant".into(),
            }),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::num(Rational::from_integer(n)))
            }
            Tok::Decimal(q) => {
                self.bump();
                Ok(Expr::num(q))
            }
            Tok::Op('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                let orders = self.primes()?;
                if *self.peek() == Tok::Op('(') {
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    self.call(&name, orders, args, pos)
                } else if orders.is_some() {
                    Err(self.error("expected `(` after derivative marks"))
                } else {
                    self.symbol(&name, pos)
                }
            }
            _ => Err(self.error("expected an operand")),
        }
    }

    /// Derivative marks after an atom name: `'`, `''`, or `'[0,1]`.
    fn primes(&mut self) -> Result<Option<Vec<u32>>, ParseError> {
        if *self.peek() != Tok::Op('\'') {
            return Ok(None);
        }
        self.bump();
        if self.eat('[') {
            let mut orders = Vec::new();
            loop {
                match self.bump() {
                    Tok::Int(n) => orders.push(n.to_u32().ok_or_else(|| self.error("order too large"))?),
                    _ => return Err(self.error("expected derivative order")),
                }
                if !self.eat(',') {
                    break;
                }
            }
            self.expect(']')?;
            return Ok(Some(orders));
        }
        let mut count = 1;
        while self.eat('\'') {
            count += 1;
        }
        Ok(Some(vec![count]))
    }

    fn symbol(&self, name: &str, pos: usize) -> Result<Expr, ParseError> {
        match &self.scope {
            Scope::Lenient => Ok(Expr::sym(name)),
            Scope::Declared(ctx) => match ctx.role(name) {
                Some(SymbolRole::Time | SymbolRole::State | SymbolRole::Param) => Ok(Expr::sym(name)),
                None => Err(ParseError::Undeclared {
                    name: name.to_string(),
                    offset: pos,
                }),
            },
        }
    }

    fn call(
        &self,
        name: &str,
        orders: Option<Vec<u32>>,
        args: Vec<Expr>,
        pos: usize,
    ) -> Result<Expr, ParseError> {
        if let Some(f) = Func::from_name(name) {
            if orders.is_some() || args.len() != 1 {
                return Err(ParseError::Syntax {
                    offset: pos,
                    message: format!("`{name}` takes exactly one argument"),
                });
            }
            return Ok(Expr::func(f, args.into_iter().next().unwrap()));
        }
        let arity_err = |expected: usize| ParseError::Syntax {
            offset: pos,
            message: format!("`{name}` expects {expected} argument(s), got {}", args.len()),
        };
        let orders = match orders {
            None => vec![0; args.len()],
            Some(o) if o.len() == args.len() => o,
            // `F'(x)` style marks on a single-argument atom
            Some(o) if o.len() == 1 && args.len() == 1 => o,
            Some(_) => return Err(arity_err(args.len())),
        };
        match &self.scope {
            Scope::Lenient => Ok(Expr::atom_app(AtomApp {
                name: Arc::from(name),
                orders,
                args,
            })),
            Scope::Declared(ctx) => {
                let Some(atom) = ctx.atom(name) else {
                    return Err(ParseError::Undeclared {
                        name: name.to_string(),
                        offset: pos,
                    });
                };
                if atom.args.len() != args.len() {
                    return Err(arity_err(atom.args.len()));
                }
                let total: u32 = orders.iter().sum();
                let base = Expr::atom(name, args.clone());
                if total == 0 {
                    return Ok(base);
                }
                if atom.rule.is_none() {
                    return Ok(Expr::atom_app(AtomApp {
                        name: Arc::from(name),
                        orders,
                        args,
                    }));
                }
                // Ruled atom with derivative marks: expand through the rule.
                let formal = &atom.args[0];
                let mut d = Expr::atom(name, vec![Expr::sym(formal)]);
                for _ in 0..total {
                    d = d.differentiate(formal, ctx).map_err(|e| ParseError::Syntax {
                        offset: pos,
                        message: e.to_string(),
                    })?;
                }
                Ok(d.substitute_one(formal, &args[0]))
            }
        }
    }
}
