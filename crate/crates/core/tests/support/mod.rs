//! Random expression strategies and the algebraic identities checked on them.
#![allow(dead_code)]

use proptest::prelude::*;
use sdesym_core::expr::Func;
use sdesym_core::fields::lie_bracket;
use sdesym_core::{Context, Expr, SdeSystem, VectorField};

pub const CASES: u32 = 256;

pub fn ctx() -> Context {
    Context::builder().states(["x", "y"]).param("a").build().unwrap()
}

pub fn sym(s: &str) -> Expr {
    Expr::sym(s)
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-3i64..=3).prop_map(Expr::int),
        Just(sym("t")),
        Just(sym("x")),
        Just(sym("y")),
        Just(sym("a")),
    ]
}

/// Rational-and-elementary expressions in t, x, y and one parameter; every
/// denominator stays positive on the default sampling box.
pub fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), 1i64..=3).prop_map(|(a, k)| a.powi(k)),
            inner.clone().prop_map(|a| a / (sym("x") * sym("x") + Expr::one())),
            inner.clone().prop_map(|a| a / sym("y")),
            inner.clone().prop_map(|a| a * sym("x").ln()),
            inner.clone().prop_map(|a| a.exp()),
            inner.prop_map(|a| Expr::func(Func::Sin, a)),
        ]
    })
}

pub fn poly() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner).prop_map(|(a, b)| a * b),
        ]
    })
}

pub fn field() -> impl Strategy<Value = VectorField> {
    (poly(), poly(), poly(), poly())
        .prop_map(|(tau, xi, eta, phi)| VectorField::new(tau, vec![xi, eta]).with_multiplier(phi))
}

/// Two-state, two-channel system with a nondegenerate diagonal.
pub fn system() -> impl Strategy<Value = SdeSystem> {
    (prop::collection::vec(poly(), 2), prop::collection::vec(poly(), 4)).prop_map(|(f, g)| {
        let diffusion = vec![
            vec![g[0].clone() + Expr::one(), g[1].clone()],
            vec![g[2].clone(), g[3].clone() + Expr::one()],
        ];
        SdeSystem::new(ctx(), f, diffusion).unwrap()
    })
}

pub fn vanishes(e: &Expr) -> bool {
    e.is_zero_canonical().unwrap()
}

pub fn field_vanishes(v: &VectorField) -> bool {
    v.components().iter().all(vanishes)
}

pub fn mixed_partials_commute(e: &Expr) -> bool {
    let c = ctx();
    let d = |e: &Expr, v: &str| e.differentiate(v, &c).unwrap();
    vanishes(&(d(&d(e, "x"), "y") - d(&d(e, "y"), "x"))) && vanishes(&(d(&d(e, "t"), "x") - d(&d(e, "x"), "t")))
}

pub fn normalize_idempotent(e: &Expr) -> bool {
    let once = e.normalize().unwrap();
    once.normalize().unwrap() == once && vanishes(&(e.clone() - once))
}

pub fn bracket_antisymmetric(x: &VectorField, y: &VectorField) -> bool {
    let c = ctx();
    let xy = lie_bracket(x, y, &c).unwrap();
    let yx = lie_bracket(y, x, &c).unwrap();
    field_vanishes(&xy.add(&yx)) && field_vanishes(&lie_bracket(x, x, &c).unwrap())
}

pub fn jacobi(x: &VectorField, y: &VectorField, z: &VectorField) -> bool {
    let c = ctx();
    let b = |p: &VectorField, q: &VectorField| lie_bracket(p, q, &c).unwrap();
    field_vanishes(&b(&b(x, y), z).add(&b(&b(y, z), x)).add(&b(&b(z, x), y)))
}

/// `D₀(FG) - F·D₀G - G·D₀F = Σ_α D_αF·D_αG`.
pub fn ito_product(s: &SdeSystem, f: &Expr, g: &Expr) -> bool {
    let lhs = s.d0(&(f.clone() * g.clone())).unwrap() - f.clone() * s.d0(g).unwrap() - g.clone() * s.d0(f).unwrap();
    let rhs = Expr::add_all((0..s.m()).map(|a| s.dalpha(f, a).unwrap() * s.dalpha(g, a).unwrap()));
    vanishes(&(lhs - rhs))
}
