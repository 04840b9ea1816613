use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Integer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintSense {
    Le,
    Eq,
    Ge,
}

impl ConstraintSense {
    fn symbol(self) -> &'static str {
        match self {
            ConstraintSense::Le => "<=",
            ConstraintSense::Eq => "=",
            ConstraintSense::Ge => ">=",
        }
    }

    pub fn holds(self, activity: f64, rhs: f64, tol: f64) -> bool {
        match self {
            ConstraintSense::Le => activity <= rhs + tol,
            ConstraintSense::Eq => (activity - rhs).abs() <= tol,
            ConstraintSense::Ge => activity >= rhs - tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: ConstraintSense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjectiveSense {
    #[default]
    Minimize,
    Maximize,
}

/// A mixed-integer linear program over bounded variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<(VarId, f64)>,
    pub sense: ObjectiveSense,
}

impl MilpModel {
    pub fn new(sense: ObjectiveSense) -> Self {
        Self {
            sense,
            ..Self::default()
        }
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
    ) -> Result<VarId> {
        let name = name.into();
        check_bounds(&name, kind, lower, upper)?;
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        Ok(VarId(self.variables.len() - 1))
    }

    pub fn integer(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> Result<VarId> {
        self.add_var(name, VarKind::Integer, lower, upper)
    }

    pub fn continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> Result<VarId> {
        self.add_var(name, VarKind::Continuous, lower, upper)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        sense: ConstraintSense,
        rhs: f64,
    ) -> Result<()> {
        let name = name.into();
        self.check_terms(&name, &terms)?;
        if !rhs.is_finite() {
            return Err(Error::config(name, "right-hand side must be finite"));
        }
        self.constraints.push(Constraint {
            name,
            terms,
            sense,
            rhs,
        });
        Ok(())
    }

    pub fn set_objective(&mut self, terms: Vec<(VarId, f64)>) -> Result<()> {
        self.check_terms("objective", &terms)?;
        self.objective = terms;
        Ok(())
    }

    fn check_terms(&self, name: &str, terms: &[(VarId, f64)]) -> Result<()> {
        for &(v, c) in terms {
            if v.0 >= self.variables.len() {
                return Err(Error::config(name, format!("unknown variable #{}", v.0)));
            }
            if !c.is_finite() {
                return Err(Error::config(name, "coefficients must be finite"));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for v in &self.variables {
            check_bounds(&v.name, v.kind, v.lower, v.upper)?;
        }
        for c in &self.constraints {
            self.check_terms(&c.name, &c.terms)?;
        }
        self.check_terms("objective", &self.objective)
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    /// Objective value of an assignment, in the model's own sense.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// Whether `values` satisfies bounds and constraints within `tol`.
    pub fn is_feasible(&self, values: &[f64], tol: f64) -> bool {
        self.variables
            .iter()
            .zip(values)
            .all(|(v, &x)| x >= v.lower - tol && x <= v.upper + tol)
            && self
                .constraints
                .iter()
                .all(|c| c.sense.holds(c.activity(values), c.rhs, tol))
    }

    /// Dense objective vector in minimization form.
    pub(crate) fn min_costs(&self) -> Vec<f64> {
        let sign = match self.sense {
            ObjectiveSense::Minimize => 1.0,
            ObjectiveSense::Maximize => -1.0,
        };
        let mut c = vec![0.0; self.variables.len()];
        for &(v, coef) in &self.objective {
            c[v.0] += sign * coef;
        }
        c
    }

    /// Plain-text listing, one line per variable and constraint, with
    /// shortest round-trip decimal rendering of every number.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let sense = match self.sense {
            ObjectiveSense::Minimize => "minimize",
            ObjectiveSense::Maximize => "maximize",
        };
        let _ = writeln!(out, "{sense} {}", render_terms(&self.objective));
        for (i, v) in self.variables.iter().enumerate() {
            let kind = match v.kind {
                VarKind::Continuous => "cont",
                VarKind::Integer => "int",
            };
            let _ = writeln!(
                out,
                "var x{i} {} {kind} [{:?}, {:?}]",
                v.name, v.lower, v.upper
            );
        }
        for c in &self.constraints {
            let _ = writeln!(
                out,
                "con {}: {} {} {:?}",
                c.name,
                render_terms(&c.terms),
                c.sense.symbol(),
                c.rhs
            );
        }
        out
    }
}

fn render_terms(terms: &[(VarId, f64)]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    terms
        .iter()
        .map(|(v, c)| format!("{c:?}*x{}", v.0))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn check_bounds(name: &str, kind: VarKind, lower: f64, upper: f64) -> Result<()> {
    if lower.is_nan() || upper.is_nan() || lower > upper {
        return Err(Error::config(
            name,
            format!("bad bounds [{lower}, {upper}]"),
        ));
    }
    if lower == f64::INFINITY || upper == f64::NEG_INFINITY {
        return Err(Error::config(name, "bounds must admit a finite value"));
    }
    if kind == VarKind::Integer && !(lower.is_finite() && upper.is_finite()) {
        return Err(Error::config(name, "integer variables need finite bounds"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_models() {
        let mut m = MilpModel::new(ObjectiveSense::Minimize);
        assert!(m.integer("x", 0.0, f64::INFINITY).is_err());
        assert!(m.continuous("y", 2.0, 1.0).is_err());
        let x = m.integer("x", 0.0, 3.0).unwrap();
        assert!(m
            .add_constraint("c", vec![(VarId(7), 1.0)], ConstraintSense::Le, 1.0)
            .is_err());
        assert!(m
            .add_constraint("c", vec![(x, f64::NAN)], ConstraintSense::Le, 1.0)
            .is_err());
        assert!(m.set_objective(vec![(VarId(1), 1.0)]).is_err());
    }

    #[test]
    fn golden_dump() {
        let mut m = MilpModel::new(ObjectiveSense::Maximize);
        let a = m.integer("a", 0.0, 1.0).unwrap();
        let y = m.continuous("y", -0.5, f64::INFINITY).unwrap();
        m.add_constraint("cap", vec![(a, 2.5), (y, -1.0)], ConstraintSense::Le, 0.1)
            .unwrap();
        m.set_objective(vec![(a, 5.0), (y, 1e-7)]).unwrap();
        let expected = "\
maximize 5.0*x0 + 1e-7*x1
var x0 a int [0.0, 1.0]
var x1 y cont [-0.5, inf]
con cap: 2.5*x0 + -1.0*x1 <= 0.1
";
        assert_eq!(m.dump(), expected);
    }
}
