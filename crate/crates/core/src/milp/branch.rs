//! Best-bound branch-and-bound on top of the LP relaxation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Result;
use crate::milp::model::{MilpModel, ObjectiveSense, VarKind};
use crate::milp::simplex::{solve_relaxation, LpStatus};
use crate::milp::{MilpSolution, NodeRecord, SolveOptions, SolveStatus};

struct Node {
    bound: f64,
    depth: usize,
    seq: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap pops the greatest: lowest bound first, then deepest, then newest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(self.seq.cmp(&other.seq))
    }
}

/// Granularity of the objective over integer points, if it has one.
///
/// When every costed variable is integer and every cost is an integer
/// multiple of some `step`, no integer solution lies strictly between two
/// multiples of `step`, so LP bounds can be rounded up to the next multiple.
fn objective_step(model: &MilpModel, costs: &[f64]) -> Option<f64> {
    let costed: Vec<f64> = costs
        .iter()
        .zip(&model.variables)
        .filter(|(c, _)| **c != 0.0)
        .map(|(c, v)| (v.kind == VarKind::Integer).then_some(c.abs()))
        .collect::<Option<_>>()?;
    if costed.is_empty() {
        return None;
    }
    'scale: for digits in 0..=6 {
        let scale = 10f64.powi(digits);
        let mut g: u64 = 0;
        for &c in &costed {
            let s = c * scale;
            let r = s.round();
            if (s - r).abs() > 1e-9 * s.max(1.0) || r > 1e12 {
                continue 'scale;
            }
            g = gcd(g, r as u64);
        }
        return (g > 0).then(|| g as f64 / scale);
    }
    None
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn round_bound(bound: f64, step: Option<f64>) -> f64 {
    match step {
        Some(s) if bound.is_finite() => {
            let q = bound / s;
            // stay below the next multiple when the LP value already sits on one
            (q - 1e-9 * q.abs().max(1.0)).ceil() * s
        }
        _ => bound,
    }
}

pub(crate) fn branch_and_bound(model: &MilpModel, options: &SolveOptions) -> Result<MilpSolution> {
    let tol = options.tolerances;
    let costs = model.min_costs();
    let sign = match model.sense {
        ObjectiveSense::Minimize => 1.0,
        ObjectiveSense::Maximize => -1.0,
    };
    let step = objective_step(model, &costs);
    let n = model.num_vars();

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        depth: 0,
        seq: 0,
        lower: model.variables.iter().map(|v| v.lower).collect(),
        upper: model.variables.iter().map(|v| v.upper).collect(),
    });
    let mut seq = 1usize;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes = 0usize;
    let mut lp_iterations = 0usize;
    let mut trace = Vec::new();
    let mut limit_hit = false;

    let gap = |inc: f64| tol.relative_gap * inc.abs().max(1.0);

    while let Some(node) = heap.pop() {
        if let Some((inc, _)) = &incumbent {
            if node.bound >= inc - gap(*inc) {
                continue;
            }
        }
        if nodes >= options.node_limit {
            heap.push(node);
            limit_hit = true;
            break;
        }
        nodes += 1;
        let lp = solve_relaxation(model, &costs, &node.lower, &node.upper, tol.feasibility)?;
        lp_iterations += lp.iterations;
        match lp.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Ok(MilpSolution {
                    status: SolveStatus::Unbounded,
                    values: lp.x,
                    objective: sign * f64::NEG_INFINITY,
                    best_bound: sign * f64::NEG_INFINITY,
                    nodes,
                    lp_iterations,
                    trace,
                });
            }
            LpStatus::Optimal => {}
        }
        let bound = round_bound(lp.objective, step).max(node.bound);
        if options.record_nodes {
            trace.push(NodeRecord {
                lower: node.lower.clone(),
                upper: node.upper.clone(),
                bound: sign * bound,
            });
        }
        if let Some((inc, _)) = &incumbent {
            if bound >= inc - gap(*inc) {
                continue;
            }
        }

        // most fractional, ties to the lowest index
        let mut branch: Option<(usize, f64)> = None;
        for (j, var) in model.variables.iter().enumerate() {
            if var.kind != VarKind::Integer {
                continue;
            }
            let frac = lp.x[j] - lp.x[j].floor();
            if frac <= tol.integrality || frac >= 1.0 - tol.integrality {
                continue;
            }
            let score = (frac - 0.5).abs();
            if branch.is_none_or(|(k, _)| score < (lp.x[k] - lp.x[k].floor() - 0.5).abs()) {
                branch = Some((j, frac));
            }
        }

        match branch {
            None => {
                let mut values = lp.x.clone();
                for (v, var) in values.iter_mut().zip(&model.variables) {
                    if var.kind == VarKind::Integer {
                        *v = v.round();
                    }
                }
                if !model.is_feasible(&values, tol.feasibility) {
                    continue;
                }
                let obj: f64 = costs.iter().zip(&values).map(|(c, v)| c * v).sum();
                if incumbent.as_ref().is_none_or(|(inc, _)| obj < *inc) {
                    incumbent = Some((obj, values));
                }
            }
            Some((j, _)) => {
                let x = lp.x[j];
                let mut down_upper = node.upper.clone();
                down_upper[j] = x.floor();
                let mut up_lower = node.lower.clone();
                up_lower[j] = x.ceil();
                heap.push(Node {
                    bound,
                    depth: node.depth + 1,
                    seq,
                    lower: node.lower.clone(),
                    upper: down_upper,
                });
                heap.push(Node {
                    bound,
                    depth: node.depth + 1,
                    seq: seq + 1,
                    lower: up_lower,
                    upper: node.upper,
                });
                seq += 2;
            }
        }
    }

    let open_bound = heap.iter().map(|nd| nd.bound).fold(f64::INFINITY, f64::min);
    let status = if limit_hit {
        SolveStatus::NodeLimit
    } else if incumbent.is_some() {
        SolveStatus::Optimal
    } else {
        SolveStatus::Infeasible
    };
    let (objective, values) = match incumbent {
        Some((obj, values)) => (obj, values),
        None => (f64::INFINITY, vec![0.0; n]),
    };
    let best_bound = if limit_hit {
        open_bound.min(objective)
    } else {
        objective
    };
    Ok(MilpSolution {
        status,
        values,
        objective: sign * objective,
        best_bound: sign * best_bound,
        nodes,
        lp_iterations,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::model::ConstraintSense;

    #[test]
    fn objective_step_detection() {
        let mut m = MilpModel::new(ObjectiveSense::Minimize);
        let a = m.integer("a", 0.0, 3.0).unwrap();
        let b = m.integer("b", 0.0, 3.0).unwrap();
        m.set_objective(vec![(a, 0.5), (b, 1.5)]).unwrap();
        assert_eq!(objective_step(&m, &m.min_costs()), Some(0.5));

        let y = m.continuous("y", 0.0, 1.0).unwrap();
        m.set_objective(vec![(a, 1.0), (y, 1.0)]).unwrap();
        assert_eq!(objective_step(&m, &m.min_costs()), None);

        m.set_objective(vec![(a, 1.0), (b, std::f64::consts::PI)])
            .unwrap();
        assert_eq!(objective_step(&m, &m.min_costs()), None);
        m.add_constraint("c", vec![(a, 1.0)], ConstraintSense::Le, 1.0)
            .unwrap();
    }

    #[test]
    fn bound_rounding() {
        assert_eq!(round_bound(123.45, Some(1.0)), 124.0);
        assert_eq!(round_bound(124.0, Some(1.0)), 124.0);
        assert_eq!(round_bound(123.999_999_999_99, Some(1.0)), 124.0);
        assert_eq!(round_bound(-2.5, Some(1.0)), -2.0);
        assert_eq!(round_bound(1.2, None), 1.2);
    }
}
