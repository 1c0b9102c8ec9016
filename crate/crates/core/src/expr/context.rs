use std::collections::BTreeSet;
use std::sync::Arc;

use super::{parse, Expr, ExprError, Func, ParseError};

/// The dependent variable of the Kolmogorov equations; reserved.
pub const DEPENDENT: &str = "u";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolRole {
    Time,
    State,
    Param,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamDecl {
    pub name: String,
    /// Only steers numeric sampling away from zero.
    pub nonzero: bool,
    pub range: Option<(f64, f64)>,
}

impl ParamDecl {
    pub fn new(name: &str) -> ParamDecl {
        ParamDecl {
            name: name.to_string(),
            nonzero: false,
            range: None,
        }
    }
}

/// A declared function atom such as `k'(x)` standing for an unknown function.
///
/// With a `rule`, the derivative of the atom with respect to its single
/// argument is rewritten to `rule` (which may mention the atom itself and the
/// argument, plus parameters). Without one, derivatives stay symbolic as
/// differentiated atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionAtom {
    pub name: String,
    pub args: Vec<String>,
    pub rule: Option<Expr>,
    pub rule_text: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Context {
    time: Arc<str>,
    states: Vec<String>,
    params: Vec<ParamDecl>,
    atoms: Vec<FunctionAtom>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ContextError {
    #[error("identifier `{0}` declared twice")]
    Duplicate(String),
    #[error("identifier `{0}` is reserved")]
    Reserved(String),
    #[error("invalid identifier `{0}`")]
    InvalidName(String),
    #[error("rule for atom `{atom}`: {source}")]
    Rule {
        atom: String,
        #[source]
        source: ParseError,
    },
    #[error("rule for atom `{atom}` references `{name}`; only the atom, its argument and parameters are allowed")]
    RuleScope { atom: String, name: String },
    #[error("atom `{0}` has a derivative rule but is not single-argument")]
    RuleArity(String),
    #[error("atom `{atom}` argument `{arg}` is not the time or a state variable")]
    AtomArgument { atom: String, arg: String },
}

pub struct ContextBuilder {
    states: Vec<String>,
    params: Vec<ParamDecl>,
    atoms: Vec<(String, Vec<String>, Option<String>)>,
}

impl ContextBuilder {
    pub fn state(mut self, name: &str) -> Self {
        self.states.push(name.to_string());
        self
    }

    pub fn states<I: IntoIterator<Item = S>, S: AsRef<str>>(mut self, names: I) -> Self {
        self.states
            .extend(names.into_iter().map(|s| s.as_ref().to_string()));
        self
    }

    pub fn param(mut self, name: &str) -> Self {
        self.params.push(ParamDecl::new(name));
        self
    }

    pub fn nonzero_param(mut self, name: &str) -> Self {
        let mut p = ParamDecl::new(name);
        p.nonzero = true;
        self.params.push(p);
        self
    }

    pub fn param_decl(mut self, decl: ParamDecl) -> Self {
        self.params.push(decl);
        self
    }

    /// Declares an atom; `rule` is parsed once all symbols are known.
    pub fn atom(mut self, name: &str, args: &[&str], rule: Option<&str>) -> Self {
        self.atoms.push((
            name.to_string(),
            args.iter().map(|s| s.to_string()).collect(),
            rule.map(str::to_string),
        ));
        self
    }

    pub fn build(self) -> Result<Context, ContextError> {
        let mut seen = BTreeSet::new();
        seen.insert("t".to_string());
        let names = self
            .states
            .iter()
            .chain(self.params.iter().map(|p| &p.name))
            .chain(self.atoms.iter().map(|a| &a.0));
        for name in names {
            if !valid_identifier(name) {
                return Err(ContextError::InvalidName(name.clone()));
            }
            if name == DEPENDENT || Func::from_name(name).is_some() {
                return Err(ContextError::Reserved(name.clone()));
            }
            if !seen.insert(name.clone()) {
                return Err(ContextError::Duplicate(name.clone()));
            }
        }
        let mut ctx = Context {
            time: Arc::from("t"),
            states: self.states,
            params: self.params,
            atoms: self
                .atoms
                .iter()
                .map(|(name, args, _)| FunctionAtom {
                    name: name.clone(),
                    args: args.clone(),
                    rule: None,
                    rule_text: None,
                })
                .collect(),
        };
        for atom in &ctx.atoms {
            for a in &atom.args {
                if ctx.role(a).is_none_or(|r| r == SymbolRole::Param) {
                    return Err(ContextError::AtomArgument {
                        atom: atom.name.clone(),
                        arg: a.clone(),
                    });
                }
            }
        }
        for (i, (name, args, rule)) in self.atoms.iter().enumerate() {
            let Some(text) = rule else { continue };
            if args.len() != 1 {
                return Err(ContextError::RuleArity(name.clone()));
            }
            let expr = parse(text, &ctx).map_err(|source| ContextError::Rule {
                atom: name.clone(),
                source,
            })?;
            for s in expr.free_symbols() {
                if s != args[0] && ctx.role(&s) != Some(SymbolRole::Param) {
                    return Err(ContextError::RuleScope {
                        atom: name.clone(),
                        name: s,
                    });
                }
            }
            for a in expr.atom_names() {
                if &a != name {
                    return Err(ContextError::RuleScope {
                        atom: name.clone(),
                        name: a,
                    });
                }
            }
            ctx.atoms[i].rule = Some(expr);
            ctx.atoms[i].rule_text = Some(text.clone());
        }
        Ok(ctx)
    }
}

pub(crate) fn valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Context {
    pub fn builder() -> ContextBuilder {
        ContextBuilder {
            states: Vec::new(),
            params: Vec::new(),
            atoms: Vec::new(),
        }
    }

    pub fn time(&self) -> &str {
        &self.time
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn params(&self) -> &[ParamDecl] {
        &self.params
    }

    pub fn param_names(&self) -> Vec<&str> {
        self.params.iter().map(|p| p.name.as_str()).collect()
    }

    pub fn atoms(&self) -> &[FunctionAtom] {
        &self.atoms
    }

    pub fn atom(&self, name: &str) -> Option<&FunctionAtom> {
        self.atoms.iter().find(|a| a.name == name)
    }

    pub fn param(&self, name: &str) -> Option<&ParamDecl> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn role(&self, name: &str) -> Option<SymbolRole> {
        if name == &*self.time {
            Some(SymbolRole::Time)
        } else if self.states.iter().any(|s| s == name) {
            Some(SymbolRole::State)
        } else if self.params.iter().any(|p| p.name == name) {
            Some(SymbolRole::Param)
        } else {
            None
        }
    }

    /// Copy of this context with some parameters removed (after substitution).
    pub fn without_params(&self, removed: &[&str]) -> Context {
        let mut c = self.clone();
        c.params.retain(|p| !removed.contains(&p.name.as_str()));
        c
    }

    /// Checks that `e` only mentions declared symbols and atoms.
    pub fn check_scope(&self, e: &Expr) -> Result<(), String> {
        for s in e.free_symbols() {
            if self.role(&s).is_none() {
                return Err(format!("undeclared symbol `{s}`"));
            }
        }
        for a in e.atom_names() {
            if self.atom(&a).is_none() {
                return Err(format!("undeclared function atom `{a}`"));
            }
        }
        Ok(())
    }

    pub(crate) fn check_arity(&self, name: &str, got: usize) -> Result<(), ExprError> {
        match self.atom(name) {
            Some(a) if a.args.len() != got => Err(ExprError::AtomArity {
                name: name.to_string(),
                expected: a.args.len(),
                got,
            }),
            _ => Ok(()),
        }
    }
}
