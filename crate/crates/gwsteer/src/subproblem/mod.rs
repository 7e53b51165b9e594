//! Conic subproblem assembly and the solver backend contract.
//!
//! [`program`] is a small modeling layer (linear objective, scalar
//! equalities, PSD blocks over named matrix variables), [`backend`] the
//! interior-point bridge, and [`build`] the two steering programs built on
//! top. See the module docs of each for the mathematical conventions; the
//! one fixed across the crate is the norm-preserving `svec` with
//! off-diagonals scaled by √2.

pub mod backend;
pub mod build;
pub mod program;

pub use backend::{BackendSettings, ClarabelBackend, ConicBackend, ConicSolution, SolverStatus};
pub use build::{
    build_gw_subproblem, build_wasserstein_problem, GwSubproblem, SubproblemSolution,
    WassersteinProblem,
};
pub use program::{ConicProgram, LinExpr, MatExpr, RectVar, ScalarVar, SymVar};
