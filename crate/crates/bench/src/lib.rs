//! Fixtures shared by the benchmarks.

use sdesym_core::problem::Problem;
use sdesym_core::{corpus, parse, Expr};

pub fn problem(case: &str) -> Problem {
    corpus::case(case)
        .expect("catalog case")
        .problem
        .compile()
        .expect("catalog problems compile")
}

/// A rational expression with nested elementary functions, in the gbm context.
pub fn messy(p: &Problem) -> Expr {
    let ctx = p.system.ctx();
    parse(
        "(exp(x) - t/(x^2 + 1))*(alpha*x - ln(x))/(sigma*x + 1) + sin(x*t)^2 + cos(x*t)^2",
        ctx,
    )
    .expect("fixture parses")
}
