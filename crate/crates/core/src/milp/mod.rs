//! A small, deterministic MILP kernel.
//!
//! Models are built with [`MilpModel`]; [`solve_lp`] solves the continuous
//! relaxation with a bounded-variable simplex and [`solve_milp`] runs
//! best-bound branch-and-bound on the most fractional integer variable.

mod branch;
mod model;
mod simplex;

pub use model::{Constraint, ConstraintSense, MilpModel, ObjectiveSense, VarId, VarKind, Variable};

use crate::error::Result;
use simplex::{solve_relaxation, LpStatus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub feasibility: f64,
    pub integrality: f64,
    pub relative_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feasibility: 1e-7,
            integrality: 1e-6,
            relative_gap: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub tolerances: Tolerances,
    /// Maximum number of LP relaxations solved.
    pub node_limit: usize,
    /// Keep a [`NodeRecord`] for every solved node.
    pub record_nodes: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            node_limit: 200_000,
            record_nodes: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Node budget exhausted; `values` hold the incumbent if one was found.
    NodeLimit,
}

/// Bounds and relaxation value of one branch-and-bound node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Relaxation bound in the model's objective sense.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: SolveStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    pub best_bound: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub trace: Vec<NodeRecord>,
}

impl MilpSolution {
    pub fn value(&self, v: VarId) -> f64 {
        self.values[v.0]
    }

    pub fn has_solution(&self) -> bool {
        match self.status {
            SolveStatus::Optimal => true,
            SolveStatus::NodeLimit => self.objective.is_finite(),
            _ => false,
        }
    }
}

/// Solve the continuous relaxation, ignoring integrality.
pub fn solve_lp(model: &MilpModel) -> Result<MilpSolution> {
    model.validate()?;
    let costs = model.min_costs();
    let lower: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = model.variables.iter().map(|v| v.upper).collect();
    let lp = solve_relaxation(
        model,
        &costs,
        &lower,
        &upper,
        Tolerances::default().feasibility,
    )?;
    let status = match lp.status {
        LpStatus::Optimal => SolveStatus::Optimal,
        LpStatus::Infeasible => SolveStatus::Infeasible,
        LpStatus::Unbounded => SolveStatus::Unbounded,
    };
    let objective = match lp.status {
        LpStatus::Optimal => model.objective_value(&lp.x),
        LpStatus::Infeasible => match model.sense {
            ObjectiveSense::Minimize => f64::INFINITY,
            ObjectiveSense::Maximize => f64::NEG_INFINITY,
        },
        LpStatus::Unbounded => match model.sense {
            ObjectiveSense::Minimize => f64::NEG_INFINITY,
            ObjectiveSense::Maximize => f64::INFINITY,
        },
    };
    Ok(MilpSolution {
        status,
        values: lp.x,
        objective,
        best_bound: objective,
        nodes: 1,
        lp_iterations: lp.iterations,
        trace: Vec::new(),
    })
}

pub fn solve_milp(model: &MilpModel, options: &SolveOptions) -> Result<MilpSolution> {
    model.validate()?;
    branch::branch_and_bound(model, options)
}
