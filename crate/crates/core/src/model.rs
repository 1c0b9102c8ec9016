//! Itô SDE systems, the operators D₀ and D_α, and the associated Kolmogorov
//! equations in expanded coefficient form.

use serde::{Deserialize, Serialize};

use crate::checks::{CheckKind, CheckReport, ReportBuilder};
use crate::expr::{Context, Expr, ExprError, SamplingConfig, ZeroError, DEPENDENT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{0}")]
    Scope(String),
    #[error("diffusion matrix gives A = 0 identically; at least one A_ij must be nonzero")]
    DegenerateDiffusion,
    #[error("Wiener channel {index} out of range (system has {m})")]
    Channel { index: usize, m: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Zero(#[from] ZeroError),
}

/// `dx_i = f_i dt + g_{iα} dW_α` over the states of `ctx`.
#[derive(Clone, Debug, PartialEq)]
pub struct SdeSystem {
    ctx: Context,
    drift: Vec<Expr>,
    diffusion: Vec<Vec<Expr>>,
    a: Vec<Vec<Expr>>,
}

impl SdeSystem {
    pub fn new(ctx: Context, drift: Vec<Expr>, diffusion: Vec<Vec<Expr>>) -> Result<SdeSystem, ModelError> {
        let n = ctx.states().len();
        if n == 0 {
            return Err(ModelError::Dimension("no state variables declared".into()));
        }
        if drift.len() != n {
            return Err(ModelError::Dimension(format!("{} drift entries for {n} states", drift.len())));
        }
        if diffusion.len() != n {
            return Err(ModelError::Dimension(format!("{} diffusion rows for {n} states", diffusion.len())));
        }
        let m = diffusion[0].len();
        if m == 0 || diffusion.iter().any(|row| row.len() != m) {
            return Err(ModelError::Dimension("diffusion rows must have equal, nonzero length".into()));
        }
        for e in drift.iter().chain(diffusion.iter().flatten()) {
            if e.contains_symbol(DEPENDENT) {
                return Err(ModelError::Scope("coefficients may not depend on u".into()));
            }
            ctx.check_scope(e).map_err(ModelError::Scope)?;
        }
        let half = Expr::frac(1, 2);
        let mut a = vec![vec![Expr::zero(); n]; n];
        let mut all_zero = true;
        for i in 0..n {
            for j in 0..n {
                let sum = Expr::add_all((0..m).map(|al| &diffusion[i][al] * &diffusion[j][al]));
                a[i][j] = (&half * &sum).normalize()?;
                all_zero &= a[i][j].is_literal_zero();
            }
        }
        if all_zero {
            return Err(ModelError::DegenerateDiffusion);
        }
        Ok(SdeSystem {
            ctx,
            drift,
            diffusion,
            a,
        })
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.drift.len()
    }

    /// Number of Wiener channels.
    pub fn m(&self) -> usize {
        self.diffusion[0].len()
    }

    pub fn drift(&self) -> &[Expr] {
        &self.drift
    }

    pub fn diffusion(&self) -> &[Vec<Expr>] {
        &self.diffusion
    }

    /// `A_ij = ½ g_iα g_jα`, normalized.
    pub fn a_matrix(&self) -> &[Vec<Expr>] {
        &self.a
    }

    pub fn states(&self) -> &[String] {
        self.ctx.states()
    }

    pub fn time(&self) -> &str {
        self.ctx.time()
    }

    /// Same system with some parameters replaced by expressions.
    pub fn substitute_params(&self, bindings: &std::collections::BTreeMap<String, Expr>) -> Result<SdeSystem, ModelError> {
        let removed: Vec<&str> = bindings.keys().map(String::as_str).collect();
        let ctx = self.ctx.without_params(&removed);
        SdeSystem::new(
            ctx,
            self.drift.iter().map(|e| e.substitute(bindings)).collect(),
            self.diffusion
                .iter()
                .map(|row| row.iter().map(|e| e.substitute(bindings)).collect())
                .collect(),
        )
    }

    pub fn partial(&self, e: &Expr, var: &str) -> Result<Expr, ExprError> {
        e.differentiate(var, &self.ctx)
    }

    /// `D₀F = F_t + f_j F_j + A_jk F_jk`, normalized.
    pub fn d0(&self, f: &Expr) -> Result<Expr, ModelError> {
        Ok(self.d0_raw(f)?.normalize()?)
    }

    pub(crate) fn d0_raw(&self, f: &Expr) -> Result<Expr, ModelError> {
        let states = self.states();
        let mut terms = vec![self.partial(f, self.time())?];
        let grads = states
            .iter()
            .map(|x| self.partial(f, x))
            .collect::<Result<Vec<_>, _>>()?;
        for (j, g) in grads.iter().enumerate() {
            if g.is_literal_zero() {
                continue;
            }
            terms.push(&self.drift[j] * g);
            for (k, xk) in states.iter().enumerate() {
                if self.a[j][k].is_literal_zero() {
                    continue;
                }
                terms.push(&self.a[j][k] * &self.partial(g, xk)?);
            }
        }
        Ok(Expr::add_all(terms))
    }

    /// `D_αF = g_jα F_j` for the zero-based channel `alpha`, normalized.
    pub fn dalpha(&self, f: &Expr, alpha: usize) -> Result<Expr, ModelError> {
        Ok(self.dalpha_raw(f, alpha)?.normalize()?)
    }

    pub(crate) fn dalpha_raw(&self, f: &Expr, alpha: usize) -> Result<Expr, ModelError> {
        if alpha >= self.m() {
            return Err(ModelError::Channel {
                index: alpha,
                m: self.m(),
            });
        }
        let mut terms = Vec::with_capacity(self.n());
        for (j, x) in self.states().iter().enumerate() {
            let g = &self.diffusion[j][alpha];
            if g.is_literal_zero() {
                continue;
            }
            terms.push(g * &self.partial(f, x)?);
        }
        Ok(Expr::add_all(terms))
    }

    /// `dF = D₀(F) dt + D_α(F) dW_α`.
    pub fn ito_differential(&self, f: &Expr) -> Result<ItoDifferential, ModelError> {
        Ok(ItoDifferential {
            dt: self.d0(f)?,
            dw: (0..self.m()).map(|a| self.dalpha(f, a)).collect::<Result<_, _>>()?,
        })
    }

    pub fn kbe(&self) -> KolmogorovEquation {
        KolmogorovEquation::backward(self.clone())
    }

    pub fn kfe(&self) -> Result<KolmogorovEquation, ModelError> {
        KolmogorovEquation::forward(self.clone())
    }

    /// First-integral conditions `D₀I = 0` and `D_αI = 0` for every channel.
    pub fn check_first_integral(&self, integral: &Expr, name: &str, cfg: &SamplingConfig) -> Result<CheckReport, ModelError> {
        self.ctx.check_scope(integral).map_err(ModelError::Scope)?;
        let mut report = ReportBuilder::new(CheckKind::FirstIntegral, name, self.ctx(), cfg);
        report.residual("d0", self.d0_raw(integral)?)?;
        for a in 0..self.m() {
            report.residual(&format!("dW[{}]", a + 1), self.dalpha_raw(integral, a)?)?;
        }
        report.note_divisions([integral]);
        Ok(report.finish())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItoDifferential {
    pub dt: Expr,
    pub dw: Vec<Expr>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquationKind {
    Backward,
    Forward,
}

/// Linear PDE `u_t + a_ij u_ij + b_k u_k + c u = 0` built from an SDE.
///
/// Backward: `a = A`, `b = f`, `c = 0`. Forward (Fokker-Planck, expanded):
/// `a = -A`, `b_i = f_i - 2 ∂_j A_ij`, `c = ∂_i f_i - ∂_i ∂_j A_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct KolmogorovEquation {
    kind: EquationKind,
    system: SdeSystem,
    a: Vec<Vec<Expr>>,
    b: Vec<Expr>,
    c: Expr,
}

impl KolmogorovEquation {
    pub fn backward(system: SdeSystem) -> KolmogorovEquation {
        KolmogorovEquation {
            kind: EquationKind::Backward,
            a: system.a.clone(),
            b: system.drift.clone(),
            c: Expr::zero(),
            system,
        }
    }

    pub fn forward(system: SdeSystem) -> Result<KolmogorovEquation, ModelError> {
        let n = system.n();
        let xs = system.states().to_vec();
        let a_sde = &system.a;
        let mut a = vec![vec![Expr::zero(); n]; n];
        let mut b = Vec::with_capacity(n);
        let mut c_terms = Vec::new();
        for i in 0..n {
            for j in 0..n {
                a[i][j] = (-&a_sde[i][j]).normalize()?;
            }
            let mut bi = vec![system.drift[i].clone()];
            for j in 0..n {
                let d = system.partial(&a_sde[i][j], &xs[j])?;
                bi.push(Expr::int(-2) * d.clone());
                c_terms.push(-system.partial(&d, &xs[i])?);
            }
            b.push(Expr::add_all(bi).normalize()?);
            c_terms.push(system.partial(&system.drift[i], &xs[i])?);
        }
        Ok(KolmogorovEquation {
            kind: EquationKind::Forward,
            a,
            b,
            c: Expr::add_all(c_terms).normalize()?,
            system,
        })
    }

    pub fn kind(&self) -> EquationKind {
        self.kind
    }

    pub fn system(&self) -> &SdeSystem {
        &self.system
    }

    /// `A_ij = ½ g_iα g_jα` of the underlying SDE.
    pub fn diffusion_matrix(&self) -> &[Vec<Expr>] {
        &self.system.a
    }

    /// Drift of the underlying SDE (the `B_k` of the backward equation).
    pub fn drift(&self) -> &[Expr] {
        &self.system.drift
    }

    /// Coefficient of `u_{x_i x_j}` in the expanded PDE.
    pub fn second_order(&self) -> &[Vec<Expr>] {
        &self.a
    }

    /// Coefficient of `u_{x_k}` in the expanded PDE.
    pub fn first_order(&self) -> &[Expr] {
        &self.b
    }

    /// Coefficient of `u` in the expanded PDE.
    pub fn zeroth_order(&self) -> &Expr {
        &self.c
    }

    /// Left-hand side of the PDE applied to `psi(t, x)`, unnormalized.
    pub fn apply(&self, psi: &Expr) -> Result<Expr, ExprError> {
        let sys = &self.system;
        let xs = sys.states();
        let mut terms = vec![sys.partial(psi, sys.time())?];
        for (i, xi) in xs.iter().enumerate() {
            let d = sys.partial(psi, xi)?;
            if d.is_literal_zero() {
                continue;
            }
            terms.push(&self.b[i] * &d);
            for (j, xj) in xs.iter().enumerate() {
                if !self.a[i][j].is_literal_zero() {
                    terms.push(&self.a[i][j] * &sys.partial(&d, xj)?);
                }
            }
        }
        if !self.c.is_literal_zero() {
            terms.push(&self.c * psi);
        }
        Ok(Expr::add_all(terms))
    }
}

impl std::fmt::Display for KolmogorovEquation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let xs = self.system.states();
        write!(f, "u_t")?;
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                if !self.a[i][j].is_literal_zero() {
                    write!(f, " + ({})*u_{}{}", self.a[i][j], xs[i], xs[j])?;
                }
            }
        }
        for (k, b) in self.b.iter().enumerate() {
            if !b.is_literal_zero() {
                write!(f, " + ({})*u_{}", b, xs[k])?;
            }
        }
        if !self.c.is_literal_zero() {
            write!(f, " + ({})*u", self.c)?;
        }
        write!(f, " = 0")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn gbm() -> SdeSystem {
        let ctx = Context::builder()
            .state("x")
            .param("alpha")
            .nonzero_param("sigma")
            .build()
            .unwrap();
        let f = parse("alpha*x", &ctx).unwrap();
        let g = parse("sigma*x", &ctx).unwrap();
        SdeSystem::new(ctx, vec![f], vec![vec![g]]).unwrap()
    }

    fn same(a: &Expr, b: &str, s: &SdeSystem) {
        let b = parse(b, s.ctx()).unwrap();
        assert!((a - &b).is_zero_canonical().unwrap(), "{a} != {b}");
    }

    #[test]
    fn gbm_operators() {
        let s = gbm();
        let x = Expr::sym("x");
        same(&s.d0(&x).unwrap(), "alpha*x", &s);
        same(&s.dalpha(&x, 0).unwrap(), "sigma*x", &s);
        let d = s.ito_differential(&x.ln()).unwrap();
        same(&d.dt, "alpha - sigma^2/2", &s);
        same(&d.dw[0], "sigma", &s);
        let d = s.ito_differential(&Expr::sym("t")).unwrap();
        same(&d.dt, "1", &s);
        same(&d.dw[0], "0", &s);
        assert!(s.d0(&Expr::int(7)).unwrap().is_literal_zero());
        assert!(matches!(s.dalpha(&x, 1), Err(ModelError::Channel { .. })));
    }

    #[test]
    fn shared_channel_a_is_rank_one() {
        let ctx = Context::builder().states(["x1", "x2"]).build().unwrap();
        let s = SdeSystem::new(
            ctx,
            vec![Expr::zero(), Expr::zero()],
            vec![vec![Expr::one()], vec![Expr::one()]],
        )
        .unwrap();
        for row in s.a_matrix() {
            for a in row {
                assert_eq!(a, &Expr::frac(1, 2));
            }
        }
    }

    #[test]
    fn rejects_degenerate_and_mismatched() {
        let ctx = Context::builder().state("x").build().unwrap();
        assert_eq!(
            SdeSystem::new(ctx.clone(), vec![Expr::one()], vec![vec![Expr::zero()]]),
            Err(ModelError::DegenerateDiffusion)
        );
        assert!(matches!(
            SdeSystem::new(ctx, vec![], vec![vec![Expr::one()]]),
            Err(ModelError::Dimension(_))
        ));
    }

    #[test]
    fn forward_gbm_expanded() {
        let s = gbm();
        let kfe = s.kfe().unwrap();
        same(&kfe.second_order()[0][0], "-sigma^2*x^2/2", &s);
        same(&kfe.first_order()[0], "alpha*x - 2*sigma^2*x", &s);
        same(kfe.zeroth_order(), "alpha - sigma^2", &s);
        // Divergence form applied to a test function agrees.
        let psi = parse("x^3*t + ln(x)", s.ctx()).unwrap();
        let ctx = s.ctx();
        let fu = parse("alpha*x", ctx).unwrap() * psi.clone();
        let au = parse("sigma^2*x^2/2", ctx).unwrap() * psi.clone();
        let rhs = -fu.differentiate("x", ctx).unwrap()
            + au.differentiate("x", ctx).unwrap().differentiate("x", ctx).unwrap();
        let lhs = psi.differentiate("t", ctx).unwrap();
        let direct = lhs - rhs;
        assert!((kfe.apply(&psi).unwrap() - direct).is_zero_canonical().unwrap());
    }

    #[test]
    fn backward_reads_back() {
        let s = gbm();
        let kbe = s.kbe();
        same(&kbe.second_order()[0][0], "sigma^2*x^2/2", &s);
        same(&kbe.first_order()[0], "alpha*x", &s);
        assert!(kbe.zeroth_order().is_literal_zero());
    }
}
