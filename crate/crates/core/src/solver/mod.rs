//! In-repo LP/MILP solver: a dense two-phase primal simplex and best-bound
//! branch-and-bound over the integer-flagged variables.
//!
//! Desk-scale instances only; there is no presolve, cutting planes, or
//! sparse factorization. Every solve is single-threaded and deterministic
//! for fixed options. For cross-validation against commercial solvers,
//! export the program with [`crate::lp::LinearProgramSpec::write_mps`].

mod branch;
mod simplex;

pub use branch::{solve_milp, MilpSolution, MilpStatus};
pub use simplex::{solve_lp, solve_lp_bounded, LpSolution, LpStatus};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub max_nodes: usize,
    /// Absolute incumbent-bound gap at which branch-and-bound stops.
    pub abs_gap: f64,
    /// Relative gap limit; 0 disables.
    pub rel_gap: f64,
    /// Wall-clock limit in seconds; 0 disables.
    pub time_limit_seconds: f64,
    pub integrality_tol: f64,
    /// Collect a line-oriented node log in the MILP solution.
    pub verbose: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50_000,
            max_nodes: 100_000,
            abs_gap: 1e-6,
            rel_gap: 0.0,
            time_limit_seconds: 0.0,
            integrality_tol: 1e-6,
            verbose: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("simplex iteration limit ({0}) exceeded")]
    IterationLimit(usize),
    #[error("LP relaxation is unbounded; cannot branch")]
    UnboundedRelaxation,
    #[error("ill-formed program: {0}")]
    Spec(#[from] crate::lp::LpSpecError),
}
