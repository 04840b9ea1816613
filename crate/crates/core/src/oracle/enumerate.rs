use crate::error::{Error, Result};
use crate::milp::{ConstraintSense, MilpModel, ObjectiveSense, VarKind};

/// Outcome of exhaustive enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationReport {
    /// `None` when no assignment is feasible.
    pub objective: Option<f64>,
    /// Every optimal assignment, in enumeration order (capped at 64).
    pub optima: Vec<Vec<f64>>,
    pub enumerated: u128,
}

impl EnumerationReport {
    pub fn is_feasible(&self) -> bool {
        self.objective.is_some()
    }

    /// First optimal assignment in enumeration order.
    pub fn best(&self) -> Option<&[f64]> {
        self.optima.first().map(|v| v.as_slice())
    }
}

const MAX_OPTIMA: usize = 64;

/// Number of assignments [`enumerate_milp`] would visit.
pub fn assignment_count(model: &MilpModel) -> Result<u128> {
    let mut total: u128 = 1;
    for v in &model.variables {
        if v.kind != VarKind::Integer || !v.lower.is_finite() || !v.upper.is_finite() {
            return Err(Error::Input(format!(
                "enumeration needs bounded integer variables, `{}` is not",
                v.name
            )));
        }
        let lo = v.lower.ceil();
        let hi = v.upper.floor();
        let size = if hi >= lo { (hi - lo) as u128 + 1 } else { 0 };
        total = total.saturating_mul(size);
    }
    Ok(total)
}

/// Visit every integer assignment and return the true optimum.
///
/// Constraint activities are updated incrementally as the odometer turns;
/// the objective of each new optimum is recomputed from scratch.
pub fn enumerate_milp(model: &MilpModel, cap: u128, tol: f64) -> Result<EnumerationReport> {
    let total = assignment_count(model)?;
    if total > cap {
        return Err(Error::EnumerationCap {
            assignments: total,
            cap,
        });
    }
    let n = model.num_vars();
    let m = model.constraints.len();
    let sign = match model.sense {
        ObjectiveSense::Minimize => 1.0,
        ObjectiveSense::Maximize => -1.0,
    };
    let mut report = EnumerationReport {
        objective: None,
        optima: Vec::new(),
        enumerated: 0,
    };
    if total == 0 {
        return Ok(report);
    }

    let lo: Vec<f64> = model.variables.iter().map(|v| v.lower.ceil()).collect();
    let hi: Vec<f64> = model.variables.iter().map(|v| v.upper.floor()).collect();
    let mut cost = vec![0.0; n];
    for &(v, c) in &model.objective {
        cost[v.0] += sign * c;
    }
    // column-wise constraint coefficients
    let mut column: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, c) in model.constraints.iter().enumerate() {
        for &(v, coef) in &c.terms {
            column[v.0].push((i, coef));
        }
    }
    let senses: Vec<ConstraintSense> = model.constraints.iter().map(|c| c.sense).collect();
    let rhs: Vec<f64> = model.constraints.iter().map(|c| c.rhs).collect();

    let mut x = lo.clone();
    let mut activity: Vec<f64> = model.constraints.iter().map(|c| c.activity(&x)).collect();
    let mut best = f64::INFINITY;

    loop {
        report.enumerated += 1;
        let feasible = (0..m).all(|i| senses[i].holds(activity[i], rhs[i], tol));
        if feasible {
            let obj: f64 = cost.iter().zip(&x).map(|(c, v)| c * v).sum();
            let same = (obj - best).abs() <= 1e-12 * obj.abs().max(1.0);
            if obj < best && !same {
                best = obj;
                report.optima.clear();
                report.optima.push(x.clone());
            } else if same && report.optima.len() < MAX_OPTIMA {
                report.optima.push(x.clone());
            }
        }

        // advance the odometer, last variable fastest
        let mut j = n;
        loop {
            if j == 0 {
                report.objective = best.is_finite().then_some(sign * best);
                return Ok(report);
            }
            j -= 1;
            if x[j] < hi[j] {
                x[j] += 1.0;
                for &(i, coef) in &column[j] {
                    activity[i] += coef;
                }
                break;
            }
            let span = hi[j] - lo[j];
            x[j] = lo[j];
            if span != 0.0 {
                for &(i, coef) in &column[j] {
                    activity[i] -= coef * span;
                }
            }
        }
        // shed accumulated drift whenever the slowest digits roll
        if j + 4 < n {
            activity = model.constraints.iter().map(|c| c.activity(&x)).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::ConstraintSense::*;

    #[test]
    fn single_binary() {
        let mut m = MilpModel::new(ObjectiveSense::Minimize);
        let x = m.integer("x", 0.0, 1.0).unwrap();
        m.set_objective(vec![(x, 1.0)]).unwrap();
        let r = enumerate_milp(&m, 100, 1e-7).unwrap();
        assert_eq!(r.objective, Some(0.0));
        assert_eq!(r.best(), Some(&[0.0][..]));
        assert_eq!(r.enumerated, 2);
    }

    #[test]
    fn knapsack() {
        let mut m = MilpModel::new(ObjectiveSense::Maximize);
        let v: Vec<_> = (0..3)
            .map(|i| m.integer(format!("x{i}"), 0.0, 1.0).unwrap())
            .collect();
        m.add_constraint("cap", v.iter().map(|&x| (x, 1.0)).collect(), Le, 2.0)
            .unwrap();
        m.set_objective(vec![(v[0], 5.0), (v[1], 4.0), (v[2], 3.0)])
            .unwrap();
        let r = enumerate_milp(&m, 100, 1e-7).unwrap();
        assert_eq!(r.objective, Some(9.0));
        assert_eq!(r.enumerated, 8);
        assert_eq!(r.optima, vec![vec![1.0, 1.0, 0.0]]);
    }

    #[test]
    fn infeasible_pair() {
        let mut m = MilpModel::new(ObjectiveSense::Minimize);
        let x = m.integer("x", 0.0, 1.0).unwrap();
        let y = m.integer("y", 0.0, 1.0).unwrap();
        m.add_constraint("c", vec![(x, 1.0), (y, 1.0)], Ge, 3.0)
            .unwrap();
        let r = enumerate_milp(&m, 100, 1e-7).unwrap();
        assert!(!r.is_feasible());
        assert_eq!(r.enumerated, 4);
    }

    #[test]
    fn refuses_large_or_continuous() {
        let mut m = MilpModel::new(ObjectiveSense::Minimize);
        for i in 0..10 {
            m.integer(format!("x{i}"), 0.0, 9.0).unwrap();
        }
        assert!(matches!(
            enumerate_milp(&m, 1_000_000, 1e-7),
            Err(Error::EnumerationCap { .. })
        ));
        m.continuous("y", 0.0, 1.0).unwrap();
        assert!(matches!(
            enumerate_milp(&m, u128::MAX, 1e-7),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn ties_are_all_reported() {
        let mut m = MilpModel::new(ObjectiveSense::Minimize);
        let x = m.integer("x", 0.0, 2.0).unwrap();
        let y = m.integer("y", 0.0, 2.0).unwrap();
        m.add_constraint("c", vec![(x, 1.0), (y, 1.0)], Eq, 2.0)
            .unwrap();
        let r = enumerate_milp(&m, 100, 1e-7).unwrap();
        assert_eq!(r.optima.len(), 3);
        assert_eq!(r.best(), Some(&[0.0, 2.0][..]));
    }
}
