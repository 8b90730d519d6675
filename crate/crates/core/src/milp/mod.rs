//! Self-contained mixed-integer linear solver.
//!
//! Problems are minimisations over bounded columns with sparse rows. Some
//! columns may be marked binary. LP relaxations are solved with a two-phase
//! bounded-variable primal simplex ([`solve_lp`]); [`solve_milp`] runs a
//! best-first branch-and-bound on top of it that stops on a gap, time or node limit.

mod branch;
mod dump;
mod simplex;

use std::time::Duration;

use thiserror::Error;

pub use branch::{solve_milp, solve_milp_with_starts};
pub use dump::{read_dump, write_dump, DumpError};
pub use simplex::solve_lp;

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-7;
/// A binary column counts as integral within this distance of 0 or 1.
pub const INT_TOL: f64 = 1e-7;
/// Objective comparison tolerance.
pub const OBJ_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MilpProblem {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub binary: Vec<bool>,
    pub rows: Vec<Row>,
}

impl MilpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_binaries(&self) -> usize {
        self.binary.iter().filter(|b| **b).count()
    }

    pub fn add_column(&mut self, lower: f64, upper: f64, cost: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.binary.push(false);
        self.objective.len() - 1
    }

    pub fn add_binary(&mut self, cost: f64) -> usize {
        let j = self.add_column(0.0, 1.0, cost);
        self.binary[j] = true;
        j
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> usize {
        self.rows.push(Row { coeffs, sense, rhs });
        self.rows.len() - 1
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn validate(&self) -> Result<(), MilpError> {
        let n = self.num_cols();
        if self.lower.len() != n || self.upper.len() != n || self.binary.len() != n {
            return Err(MilpError::InvalidProblem("column arrays have different lengths".into()));
        }
        for j in 0..n {
            if !self.objective[j].is_finite() {
                return Err(MilpError::InvalidProblem(format!("objective coefficient of column {j} is not finite")));
            }
            if self.lower[j].is_nan() || self.upper[j].is_nan() || self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(MilpError::InvalidProblem(format!("column {j} has invalid bounds")));
            }
            if self.binary[j] && (self.lower[j] < 0.0 || self.upper[j] > 1.0) {
                return Err(MilpError::InvalidProblem(format!("binary column {j} has bounds outside [0, 1]")));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(MilpError::InvalidProblem(format!("row {i} has a non-finite right-hand side")));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(MilpError::InvalidProblem(format!("row {i} references column {j} of {n}")));
                }
                if !a.is_finite() {
                    return Err(MilpError::InvalidProblem(format!("row {i} has a non-finite coefficient")));
                }
            }
        }
        Ok(())
    }

    /// Largest violation of rows and column bounds at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.num_cols() {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let v = match row.sense {
                Sense::Le => lhs - row.rhs,
                Sense::Ge => row.rhs - lhs,
                Sense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    /// Proven optimal within the requested relative gap.
    Optimal,
    /// Time limit reached; the best incumbent is returned.
    TimeLimit,
    /// Node limit reached; the best incumbent is returned.
    NodeLimit,
    Infeasible,
    Unbounded,
}

impl MilpStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, MilpStatus::Optimal | MilpStatus::TimeLimit | MilpStatus::NodeLimit)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: MilpStatus,
    pub columns: Vec<f64>,
    pub objective: f64,
    /// Best proven lower bound.
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverControls {
    pub mip_gap: f64,
    pub time_limit: Duration,
    /// Cap on LP relaxations solved. Unlike the time limit it gives the same
    /// answer on every machine.
    pub node_limit: Option<usize>,
}

impl Default for SolverControls {
    fn default() -> Self {
        Self { mip_gap: 0.01, time_limit: Duration::from_secs(500), node_limit: None }
    }
}

impl SolverControls {
    pub fn new(mip_gap: f64, time_limit_s: f64) -> Self {
        Self { mip_gap, time_limit: Duration::from_secs_f64(time_limit_s.max(0.0)), node_limit: None }
    }

    pub fn with_node_limit(self, node_limit: Option<usize>) -> Self {
        Self { node_limit, ..self }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MilpError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("numerical trouble in the simplex: {0}")]
    NumericInstability(String),
    /// The time or node limit was reached before any integer solution.
    #[error("limit reached after {nodes} nodes without an incumbent")]
    NoIncumbentAtTimeout { nodes: usize, wall_time_s: f64 },
}

/// Relative gap between an incumbent and a bound, as reported by most MIP solvers.
pub fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    let diff = (incumbent - bound).max(0.0);
    if diff <= OBJ_TOL * incumbent.abs().max(1.0) {
        0.0
    } else {
        diff / incumbent.abs().max(1e-10)
    }
}
