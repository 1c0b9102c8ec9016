//! Symbolic verification of Lie point symmetries for Itô SDEs and their
//! Kolmogorov backward and forward equations.
//!
//! ```
//! use sdesym_core::checks::check_sde_symmetry;
//! use sdesym_core::{parse, Context, Expr, SamplingConfig, SdeSystem, VectorField};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let ctx = Context::builder().states(["x"]).param("alpha").nonzero_param("sigma").build()?;
//! let s = SdeSystem::new(
//!     ctx.clone(),
//!     vec![parse("alpha*x", &ctx)?],
//!     vec![vec![parse("sigma*x", &ctx)?]],
//! )?;
//! let x3 = VectorField::new(Expr::zero(), vec![parse("x", &ctx)?]);
//! let report = check_sde_symmetry(&s, &x3, "X3", &SamplingConfig::default())?;
//! assert!(report.passed());
//! # Ok(())
//! # }
//! ```

pub mod bridge;
pub mod checks;
pub mod corpus;
pub mod expr;
pub mod fields;
pub mod jet;
pub mod model;
pub mod problem;

pub use bridge::{TransferRecord, TransferRule};
pub use checks::{CheckKind, CheckReport, Verdict};
pub use corpus::{list_cases, run_case, CaseReport};
pub use expr::{parse, Context, Expr, Mode, SamplingConfig, ZeroVerdict};
pub use fields::{FieldBasis, VectorField};
pub use jet::{invariance_residual, prolong, split_by_monomials, JetExpression};
pub use model::{KolmogorovEquation, SdeSystem};
pub use problem::{CandidateKind, Problem, ProblemFile};
