//! Solving [`MilpModel`]s: built-in branch and bound over LP relaxations,
//! external command-line engines, and an exhaustive oracle for tests.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::milp::MilpModel;

mod bnb;
mod external;
mod oracle;

pub use bnb::solve_builtin;
pub use external::{parse_cbc_solution, parse_highs_solution, solve_external, ExternalEngine, ExternalError};
pub use oracle::{enumerate_oracle, OracleError, DEFAULT_ORACLE_CAP};

/// Integrality, feasibility and optimality tolerance.
pub const TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    FeasibleTimeLimit,
    Infeasible,
    Error,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub nodes: usize,
    pub lp_solves: usize,
    pub wall: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub assignment: Vec<f64>,
    pub objective: f64,
    /// Best proven lower bound.
    pub bound: f64,
    pub stats: SolveStats,
}

impl SolveOutcome {
    pub fn has_solution(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::FeasibleTimeLimit)
    }

    pub(crate) fn failed(status: SolveStatus, wall: Duration) -> Self {
        Self {
            status,
            assignment: Vec::new(),
            objective: f64::INFINITY,
            bound: f64::NEG_INFINITY,
            stats: SolveStats {
                wall,
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveLimits {
    pub time: Option<Duration>,
    /// Relative gap at which search stops.
    pub gap: f64,
}

impl Default for SolveLimits {
    fn default() -> Self {
        Self { time: None, gap: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Backend {
    #[default]
    Builtin,
    External(ExternalEngine),
}

/// Solves with the chosen backend; an unavailable external engine falls back
/// to the built-in solver with a warning.
pub fn solve(model: &MilpModel, limits: &SolveLimits, backend: &Backend) -> SolveOutcome {
    match backend {
        Backend::Builtin => solve_builtin(model, limits),
        Backend::External(engine) => match solve_external(model, limits, engine) {
            Ok(out) => out,
            Err(e) => {
                log::warn!("external solver unavailable ({e}); using the built-in solver");
                solve_builtin(model, limits)
            }
        },
    }
}

pub(crate) fn gap_closed(objective: f64, bound: f64, gap: f64) -> bool {
    let scale = objective.abs().max(1.0);
    objective - bound <= TOL * scale || (gap > 0.0 && objective - bound <= gap * scale)
}
