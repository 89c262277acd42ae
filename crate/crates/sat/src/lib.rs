// SPDX-License-Identifier: Apache-2.0

//! A small incremental CDCL SAT solver.
//!
//! [`Solver`] is the incremental interface used by the model checker;
//! [`Cnf`] plus [`solve`] is the one-shot interface, with DIMACS import and
//! export for interchange with other solvers.

mod cnf;
pub mod external;
mod lit;
mod solver;

pub use cnf::{export_dimacs, import_dimacs, solve, Cnf, CnfError, DimacsError, SolveOutcome};
pub use lit::{Lit, Var};
pub use solver::{Budget, Solver, Stats, Status};
