//! Dispatch MILP over aggregated unit classes.
//!
//! Per class and interval the model carries an integer producing count for
//! every bid level. Classes with start or no-load costs also carry a
//! committed count `c` (`sum n <= c <= count`) and, when starting costs
//! money, a start count `s >= c_k - c_{k-1}`. Supply is measured in quanta
//! of the greatest common divisor of all bids, which lets the balance row
//! have an integer right-hand side.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::milp::{ConstraintSense, MilpModel, ObjectiveSense, VarId};
use crate::scheduler::UnitClass;

/// Shortfall penalty per kW relative to the dearest energy cost.
pub const SHORTFALL_PENALTY_FACTOR: f64 = 1e3;

const GCD_DIGITS: i32 = 6;

/// Inputs of one dispatch problem over a prediction horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchInputs<'a> {
    pub demand: &'a [f64],
    pub res: &'a [f64],
    pub classes: &'a [UnitClass],
    /// Committed units per class at the end of the previous interval.
    pub prev_committed: &'a [u32],
    /// Remaining energy per class, kWh; `None` for unlimited.
    pub energy_left: &'a [Option<f64>],
    pub interval_hours: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassVars {
    pub produce: Vec<VarId>,
    pub committed: Option<VarId>,
    pub start: Option<VarId>,
}

/// A built dispatch MILP plus the variable layout needed to decode it.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchModel {
    pub model: MilpModel,
    /// `vars[k][c]` for interval `k` and class `c`.
    pub vars: Vec<Vec<ClassVars>>,
    pub shortfall: Vec<Option<VarId>>,
    /// Supply quantum, kW.
    pub quantum: f64,
    /// Penalty per kW of unserved load.
    pub penalty: f64,
}

/// Dispatch of one class in one interval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDispatch {
    /// Producing units per bid level.
    pub producing: Vec<u32>,
    pub committed: u32,
    pub started: u32,
}

impl ClassDispatch {
    pub fn idle(levels: usize) -> Self {
        Self {
            producing: vec![0; levels],
            committed: 0,
            started: 0,
        }
    }

    pub fn power(&self, class: &UnitClass) -> f64 {
        self.producing
            .iter()
            .zip(&class.bid_ladder)
            .map(|(&n, &b)| n as f64 * b)
            .sum()
    }

    pub fn units_producing(&self) -> u32 {
        self.producing.iter().sum()
    }
}

/// Per-interval dispatch across all classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DispatchDecision {
    pub classes: Vec<ClassDispatch>,
}

/// Cost split of a dispatch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostParts {
    /// Production cost.
    pub j1: f64,
    /// Start and no-load cost.
    pub j2: f64,
    /// Unserved-load penalty.
    pub penalty: f64,
}

impl CostParts {
    pub fn total(&self) -> f64 {
        self.j1 + self.j2 + self.penalty
    }

    pub fn add(&mut self, other: CostParts) {
        self.j1 += other.j1;
        self.j2 += other.j2;
        self.penalty += other.penalty;
    }
}

impl DispatchDecision {
    pub fn supply(&self, classes: &[UnitClass]) -> f64 {
        self.classes
            .iter()
            .zip(classes)
            .map(|(d, c)| d.power(c))
            .sum()
    }

    /// Cost of this interval; the penalty applies to load left after RES
    /// and dispatched supply.
    pub fn cost(&self, classes: &[UnitClass], residual: f64, penalty: f64) -> CostParts {
        let mut parts = CostParts::default();
        for (d, c) in self.classes.iter().zip(classes) {
            parts.j1 += c.c_energy * d.power(c);
            let idle = d.committed.saturating_sub(d.units_producing());
            parts.j2 += c.c_start * d.started as f64 + c.c_noload * idle as f64;
        }
        parts.penalty = penalty * unserved(residual, self.supply(classes));
        parts
    }
}

pub fn unserved(residual: f64, supply: f64) -> f64 {
    (residual - supply).max(0.0)
}

/// Greatest common divisor of the given positive values at micro resolution.
pub fn common_quantum(values: impl IntoIterator<Item = f64>) -> Result<f64> {
    let scale = 10f64.powi(GCD_DIGITS);
    let mut g: u64 = 0;
    for v in values {
        let s = v * scale;
        let r = s.round();
        if !(r >= 1.0) || (s - r).abs() > 1e-6 * r.max(1.0) || r > 1e15 {
            return Err(Error::config(
                "units.bid_ladder",
                format!("bid {v} is not a multiple of 1e-{GCD_DIGITS} kW"),
            ));
        }
        let mut b = r as u64;
        let mut a = g;
        while b != 0 {
            (a, b) = (b, a % b);
        }
        g = a;
    }
    if g == 0 {
        return Err(Error::config("units", "no bids to dispatch"));
    }
    Ok(g as f64 / scale)
}

/// Shortfall penalty per kW for a set of classes.
pub fn shortfall_penalty(classes: &[UnitClass]) -> f64 {
    let dearest = classes.iter().map(|c| c.c_energy).fold(0.0, f64::max);
    SHORTFALL_PENALTY_FACTOR * if dearest > 0.0 { dearest } else { 1.0 }
}

/// Quanta needed to cover `residual` kW.
pub fn required_quanta(residual: f64, quantum: f64) -> u64 {
    if residual <= 0.0 {
        0
    } else {
        let q = residual / quantum;
        (q - 1e-9 * q.max(1.0)).ceil().max(0.0) as u64
    }
}

pub fn build_dispatch_model(inputs: &DispatchInputs<'_>) -> Result<DispatchModel> {
    let h = inputs.demand.len();
    let classes = inputs.classes;
    if inputs.res.len() != h {
        return Err(Error::Input(format!(
            "demand has {h} intervals, RES has {}",
            inputs.res.len()
        )));
    }
    if inputs.prev_committed.len() != classes.len() || inputs.energy_left.len() != classes.len() {
        return Err(Error::Input(
            "per-class state does not match the class list".into(),
        ));
    }
    for (c, &prev) in classes.iter().zip(inputs.prev_committed) {
        if prev > c.count {
            return Err(Error::Input(format!(
                "{} committed units exceed class `{}` size {}",
                prev, c.name, c.count
            )));
        }
    }
    let quantum = common_quantum(classes.iter().flat_map(|c| c.bid_ladder.iter().copied()))?;
    let penalty = shortfall_penalty(classes);
    let capacity_quanta: f64 = classes
        .iter()
        .map(|c| c.count as f64 * c.bid_ladder.last().copied().unwrap_or(0.0) / quantum)
        .sum();
    let budgeted = inputs.energy_left.iter().any(Option::is_some);

    let mut model = MilpModel::new(ObjectiveSense::Minimize);
    let mut objective = Vec::new();
    let mut vars = Vec::with_capacity(h);
    let mut shortfall = Vec::with_capacity(h);
    let mut prev_c: Vec<Option<VarId>> = vec![None; classes.len()];

    for k in 0..h {
        let mut row = Vec::with_capacity(classes.len());
        for (ci, class) in classes.iter().enumerate() {
            let count = class.count as f64;
            let tracked = class.tracks_commitment();
            let produce: Vec<VarId> = class
                .bid_ladder
                .iter()
                .map(|b| model.integer(format!("n[{k}][{}][{b}]", class.name), 0.0, count))
                .collect::<Result<_>>()?;
            for (&v, &b) in produce.iter().zip(&class.bid_ladder) {
                let noload = if tracked { class.c_noload } else { 0.0 };
                let coef = class.c_energy * b - noload;
                if coef != 0.0 {
                    objective.push((v, coef));
                }
            }
            let all_units: Vec<(VarId, f64)> = produce.iter().map(|&v| (v, 1.0)).collect();
            let (committed, start) = if tracked {
                let c = model.integer(format!("c[{k}][{}]", class.name), 0.0, count)?;
                if class.c_noload != 0.0 {
                    objective.push((c, class.c_noload));
                }
                let mut t = all_units.clone();
                t.push((c, -1.0));
                model.add_constraint(
                    format!("commit[{k}][{}]", class.name),
                    t,
                    ConstraintSense::Le,
                    0.0,
                )?;
                let s = if class.c_start > 0.0 {
                    let s = model.integer(format!("s[{k}][{}]", class.name), 0.0, count)?;
                    objective.push((s, class.c_start));
                    let (terms, rhs) = match prev_c[ci] {
                        Some(p) => (vec![(c, 1.0), (p, -1.0), (s, -1.0)], 0.0),
                        None => (vec![(c, 1.0), (s, -1.0)], inputs.prev_committed[ci] as f64),
                    };
                    model.add_constraint(
                        format!("start[{k}][{}]", class.name),
                        terms,
                        ConstraintSense::Le,
                        rhs,
                    )?;
                    Some(s)
                } else {
                    None
                };
                prev_c[ci] = Some(c);
                (Some(c), s)
            } else {
                if class.bid_ladder.len() > 1 {
                    model.add_constraint(
                        format!("units[{k}][{}]", class.name),
                        all_units,
                        ConstraintSense::Le,
                        count,
                    )?;
                }
                (None, None)
            };
            row.push(ClassVars {
                produce,
                committed,
                start,
            });
        }

        let residual = inputs.demand[k] - inputs.res[k];
        let need = required_quanta(residual, quantum);
        let mut slack = None;
        if need > 0 {
            let mut terms: Vec<(VarId, f64)> = Vec::new();
            for (class, cv) in classes.iter().zip(&row) {
                for (&v, &b) in cv.produce.iter().zip(&class.bid_ladder) {
                    terms.push((v, b / quantum));
                }
            }
            let max_short = if budgeted {
                need as f64
            } else {
                (need as f64 - capacity_quanta).max(0.0).ceil()
            };
            if max_short > 0.0 {
                let u = model.integer(format!("u[{k}]"), 0.0, max_short)?;
                objective.push((u, penalty * quantum));
                terms.push((u, 1.0));
                slack = Some(u);
                // The first short quantum is only partly unserved; `z` flags a
                // shortfall and refunds the unused part of that quantum.
                let refund = need as f64 * quantum - residual;
                if refund > 0.0 {
                    let z = model.integer(format!("z[{k}]"), 0.0, 1.0)?;
                    objective.push((z, -penalty * refund));
                    model.add_constraint(
                        format!("short[{k}]"),
                        vec![(z, 1.0), (u, -1.0)],
                        ConstraintSense::Le,
                        0.0,
                    )?;
                }
            }
            model.add_constraint(
                format!("balance[{k}]"),
                terms,
                ConstraintSense::Ge,
                need as f64,
            )?;
        }
        shortfall.push(slack);
        vars.push(row);
    }

    for (ci, class) in classes.iter().enumerate() {
        if let Some(left) = inputs.energy_left[ci] {
            let terms: Vec<(VarId, f64)> = vars
                .iter()
                .flat_map(|row| {
                    row[ci]
                        .produce
                        .iter()
                        .zip(&class.bid_ladder)
                        .map(|(&v, &b)| (v, b * inputs.interval_hours))
                })
                .collect();
            model.add_constraint(
                format!("energy[{}]", class.name),
                terms,
                ConstraintSense::Le,
                left.max(0.0),
            )?;
        }
    }

    model.set_objective(objective)?;
    Ok(DispatchModel {
        model,
        vars,
        shortfall,
        quantum,
        penalty,
    })
}

/// Canonical bid decomposition of `power` for a class without commitment
/// costs: fewest units, then as many high bids as possible.
pub(crate) fn canonical_levels(class: &UnitClass, power: f64, quantum: f64) -> Option<Vec<u32>> {
    let target = (power / quantum).round() as usize;
    let sizes: Vec<usize> = class
        .bid_ladder
        .iter()
        .map(|b| (b / quantum).round() as usize)
        .collect();
    const UNREACHABLE: u32 = u32::MAX;
    let mut fewest = vec![UNREACHABLE; target + 1];
    fewest[0] = 0;
    for r in 1..=target {
        for &s in &sizes {
            if s <= r && fewest[r - s] != UNREACHABLE {
                fewest[r] = fewest[r].min(fewest[r - s] + 1);
            }
        }
    }
    if fewest[target] == UNREACHABLE || fewest[target] > class.count {
        return None;
    }
    let mut levels = vec![0u32; sizes.len()];
    let mut r = target;
    for (l, &s) in sizes.iter().enumerate().rev() {
        while s <= r && fewest[r - s] != UNREACHABLE && fewest[r - s] + 1 == fewest[r] {
            levels[l] += 1;
            r -= s;
        }
    }
    Some(levels)
}

impl DispatchModel {
    /// Read interval `k`'s decision out of a solution vector.
    pub fn decode(
        &self,
        classes: &[UnitClass],
        values: &[f64],
        k: usize,
        prev: &[u32],
    ) -> DispatchDecision {
        let get = |v: VarId| values[v.0].round().max(0.0) as u32;
        let mut out = Vec::with_capacity(classes.len());
        for (ci, (class, cv)) in classes.iter().zip(&self.vars[k]).enumerate() {
            let mut producing: Vec<u32> = cv.produce.iter().map(|&v| get(v)).collect();
            let committed = match cv.committed {
                Some(c) => get(c),
                None => {
                    let power: f64 = producing
                        .iter()
                        .zip(&class.bid_ladder)
                        .map(|(&n, &b)| n as f64 * b)
                        .sum();
                    if let Some(levels) = canonical_levels(class, power, self.quantum) {
                        producing = levels;
                    }
                    producing.iter().sum()
                }
            };
            let started = match cv.start {
                Some(s) => get(s),
                None => committed.saturating_sub(prev[ci]),
            };
            out.push(ClassDispatch {
                producing,
                committed,
                started,
            });
        }
        DispatchDecision { classes: out }
    }

    /// Decode the full horizon, chaining committed counts from `prev`.
    pub fn decode_all(
        &self,
        classes: &[UnitClass],
        values: &[f64],
        prev: &[u32],
    ) -> Vec<DispatchDecision> {
        let mut prev = prev.to_vec();
        let mut out = Vec::with_capacity(self.vars.len());
        for k in 0..self.vars.len() {
            let d = self.decode(classes, values, k, &prev);
            prev = d.classes.iter().map(|c| c.committed).collect();
            out.push(d);
        }
        out
    }
}
