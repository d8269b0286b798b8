//! Semidefinite feasibility layer: affine matrix expressions, LMI problems,
//! a Clarabel backend, and solver-independent verification.

mod expr;
mod problem;

pub use expr::{Affine, MatExpr};
pub use problem::{
    ConstraintReport, LmiConfig, LmiProblem, LmiSolution, Sense, Status, VarId, VarKind,
    VerifyReport,
};
