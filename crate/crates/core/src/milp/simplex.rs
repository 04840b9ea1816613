//! Dense two-phase primal simplex over bounded variables.
//!
//! Every row `i` gets a slack `s_i` with `a_i x + s_i = b_i`; the slack's
//! bounds encode the row sense (`<=`: `[0, inf)`, `>=`: `(-inf, 0]`,
//! `=`: `[0, 0]`). Non-basic variables sit at a finite bound (free ones at
//! zero), so variable bounds never become rows. Rows whose slack cannot
//! absorb the initial residual receive an artificial column for phase one.

use crate::error::{Error, Result};
use crate::milp::model::{ConstraintSense, MilpModel};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const STEP_TIE: f64 = 1e-12;
const DEGENERATE_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub(crate) struct LpOutcome {
    pub status: LpStatus,
    /// Structural values.
    pub x: Vec<f64>,
    /// Objective in minimization form.
    pub objective: f64,
    pub iterations: usize,
}

const NOT_BASIC: usize = usize::MAX;

struct Tableau {
    m: usize,
    cols: usize,
    n: usize,
    /// Row-major `B^-1 A`.
    t: Vec<f64>,
    d: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<usize>,
    x: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    /// Original column entries per row (structural part), for recomputing x_B.
    a: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    art_start: usize,
    iterations: usize,
    iteration_limit: usize,
}

impl Tableau {
    fn build(model: &MilpModel, lower: &[f64], upper: &[f64]) -> Self {
        let n = model.num_vars();
        let m = model.constraints.len();
        let mut x0: Vec<f64> = (0..n)
            .map(|j| {
                if lower[j].is_finite() {
                    lower[j]
                } else if upper[j].is_finite() {
                    upper[j]
                } else {
                    0.0
                }
            })
            .collect();

        let mut a = Vec::with_capacity(m);
        let mut b = Vec::with_capacity(m);
        let mut needs_art = Vec::with_capacity(m);
        let mut slack_lo = Vec::with_capacity(m);
        let mut slack_up = Vec::with_capacity(m);
        let mut residual = Vec::with_capacity(m);
        for c in &model.constraints {
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(c.terms.len());
            for &(v, coef) in &c.terms {
                match row.iter_mut().find(|(j, _)| *j == v.0) {
                    Some(e) => e.1 += coef,
                    None => row.push((v.0, coef)),
                }
            }
            let r = c.rhs - row.iter().map(|&(j, coef)| coef * x0[j]).sum::<f64>();
            let (sl, su) = match c.sense {
                ConstraintSense::Le => (0.0, f64::INFINITY),
                ConstraintSense::Ge => (f64::NEG_INFINITY, 0.0),
                ConstraintSense::Eq => (0.0, 0.0),
            };
            needs_art.push(!(r >= sl && r <= su));
            slack_lo.push(sl);
            slack_up.push(su);
            residual.push(r);
            a.push(row);
            b.push(c.rhs);
        }
        let n_art = needs_art.iter().filter(|&&f| f).count();
        let art_start = n + m;
        let cols = n + m + n_art;

        let mut lo = lower.to_vec();
        let mut up = upper.to_vec();
        lo.extend(&slack_lo);
        up.extend(&slack_up);
        lo.extend(std::iter::repeat_n(0.0, n_art));
        up.extend(std::iter::repeat_n(f64::INFINITY, n_art));
        x0.extend(std::iter::repeat_n(0.0, m + n_art));

        let mut t = vec![0.0; m * cols];
        let mut basis = vec![0; m];
        let mut row_of = vec![NOT_BASIC; cols];
        let mut art = art_start;
        for i in 0..m {
            let (basic, coef) = if needs_art[i] {
                let sign = residual[i].signum();
                t[i * cols + art] = sign;
                let col = art;
                art += 1;
                (col, sign)
            } else {
                (n + i, 1.0)
            };
            for &(j, v) in &a[i] {
                t[i * cols + j] = v;
            }
            t[i * cols + n + i] = 1.0;
            if coef != 1.0 {
                for e in &mut t[i * cols..(i + 1) * cols] {
                    *e /= coef;
                }
            }
            basis[i] = basic;
            row_of[basic] = i;
            x0[basic] = if needs_art[i] {
                residual[i].abs()
            } else {
                residual[i]
            };
        }

        Self {
            m,
            cols,
            n,
            t,
            d: vec![0.0; cols],
            basis,
            row_of,
            x: x0,
            lo,
            up,
            a,
            b,
            art_start,
            iterations: 0,
            iteration_limit: 20_000 + 200 * (m + n),
        }
    }

    fn set_costs(&mut self, c: &[f64]) {
        self.d.copy_from_slice(c);
        for i in 0..self.m {
            let cb = c[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.cols..(i + 1) * self.cols];
                for (dj, &tij) in self.d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
        for i in 0..self.m {
            self.d[self.basis[i]] = 0.0;
        }
    }

    /// Recompute basic values from the non-basic ones to shed drift.
    fn refresh_basic(&mut self) {
        let mut r = self.b.clone();
        for (i, row) in self.a.iter().enumerate() {
            for &(j, v) in row {
                if self.row_of[j] == NOT_BASIC {
                    r[i] -= v * self.x[j];
                }
            }
            let s = self.n + i;
            if self.row_of[s] == NOT_BASIC {
                r[i] -= self.x[s];
            }
        }
        // B^-1 is the slack block of the tableau; non-basic artificials sit at zero
        for (k, &col) in self.basis.clone().iter().enumerate() {
            let mut v = 0.0;
            for (i, ri) in r.iter().enumerate() {
                v += self.t[k * self.cols + self.n + i] * ri;
            }
            self.x[col] = v;
        }
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.cols {
            if self.row_of[j] != NOT_BASIC || self.lo[j] == self.up[j] {
                continue;
            }
            let dj = self.d[j];
            let dir = if dj < -COST_TOL && self.x[j] < self.up[j] {
                1.0
            } else if dj > COST_TOL && self.x[j] > self.lo[j] {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            let score = dj.abs();
            if best.is_none_or(|(_, _, s)| score > s) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let p = self.t[r * cols + j];
        for e in &mut self.t[r * cols..(r + 1) * cols] {
            *e /= p;
        }
        let nz: Vec<(usize, f64)> = self.t[r * cols..(r + 1) * cols]
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(k, v)| (k, *v))
            .collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * cols + j];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * cols..(i + 1) * cols];
            for &(k, v) in &nz {
                row[k] -= f * v;
            }
            row[j] = 0.0;
        }
        let f = self.d[j];
        if f != 0.0 {
            for &(k, v) in &nz {
                self.d[k] -= f * v;
            }
            self.d[j] = 0.0;
        }
        let leaving = self.basis[r];
        self.row_of[leaving] = NOT_BASIC;
        self.basis[r] = j;
        self.row_of[j] = r;
    }

    /// Run primal simplex on the current cost row. Returns false if unbounded.
    fn optimize(&mut self) -> Result<bool> {
        let mut bland = false;
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= self.iteration_limit {
                return Err(Error::Numerical(format!(
                    "simplex iteration limit {} reached",
                    self.iteration_limit
                )));
            }
            let Some((j, dir)) = self.choose_entering(bland) else {
                return Ok(true);
            };
            self.iterations += 1;

            let mut step = self.up[j] - self.lo[j];
            let mut leave: Option<(usize, f64, f64)> = None;
            for i in 0..self.m {
                let alpha = self.t[i * self.cols + j];
                if alpha.abs() < PIVOT_TOL {
                    continue;
                }
                let bvar = self.basis[i];
                let rate = -dir * alpha;
                let (limit, target) = if rate < 0.0 {
                    if !self.lo[bvar].is_finite() {
                        continue;
                    }
                    (
                        ((self.x[bvar] - self.lo[bvar]) / -rate).max(0.0),
                        self.lo[bvar],
                    )
                } else {
                    if !self.up[bvar].is_finite() {
                        continue;
                    }
                    (
                        ((self.up[bvar] - self.x[bvar]) / rate).max(0.0),
                        self.up[bvar],
                    )
                };
                let better = if limit < step - STEP_TIE {
                    true
                } else if let Some((r, _, _)) = leave.filter(|_| limit <= step + STEP_TIE) {
                    if bland {
                        bvar < self.basis[r]
                    } else {
                        alpha.abs() > self.t[r * self.cols + j].abs()
                    }
                } else {
                    false
                };
                if better {
                    step = limit.min(step);
                    leave = Some((i, limit, target));
                }
            }
            if !step.is_finite() {
                return Ok(false);
            }
            if let Some((_, limit, _)) = leave {
                step = limit;
            }

            if step <= STEP_TIE {
                degenerate += 1;
                if degenerate > DEGENERATE_LIMIT {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }

            self.x[j] += dir * step;
            for i in 0..self.m {
                let alpha = self.t[i * self.cols + j];
                if alpha != 0.0 {
                    let bvar = self.basis[i];
                    self.x[bvar] -= dir * alpha * step;
                }
            }
            match leave {
                Some((r, _, target)) => {
                    let bvar = self.basis[r];
                    self.x[bvar] = target;
                    self.pivot(r, j);
                }
                None => {
                    // bound flip
                    self.x[j] = if dir > 0.0 { self.up[j] } else { self.lo[j] };
                }
            }
        }
    }
}

/// Solve the LP relaxation of `model` under overridden variable bounds.
pub(crate) fn solve_relaxation(
    model: &MilpModel,
    costs: &[f64],
    lower: &[f64],
    upper: &[f64],
    feasibility_tol: f64,
) -> Result<LpOutcome> {
    let n = model.num_vars();
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        return Ok(LpOutcome {
            status: LpStatus::Infeasible,
            x: vec![0.0; n],
            objective: f64::INFINITY,
            iterations: 0,
        });
    }
    let mut tab = Tableau::build(model, lower, upper);

    if tab.cols > tab.art_start {
        let mut phase1 = vec![0.0; tab.cols];
        for c in &mut phase1[tab.art_start..] {
            *c = 1.0;
        }
        tab.set_costs(&phase1);
        tab.optimize()?;
        tab.refresh_basic();
        let infeasibility: f64 = (tab.art_start..tab.cols).map(|j| tab.x[j].abs()).sum();
        let scale = 1.0 + tab.b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if infeasibility > feasibility_tol * scale {
            return Ok(LpOutcome {
                status: LpStatus::Infeasible,
                x: tab.x[..n].to_vec(),
                objective: f64::INFINITY,
                iterations: tab.iterations,
            });
        }
        for j in tab.art_start..tab.cols {
            tab.up[j] = 0.0;
            if tab.row_of[j] == NOT_BASIC {
                tab.x[j] = 0.0;
            }
        }
    }

    let mut full = vec![0.0; tab.cols];
    full[..n].copy_from_slice(costs);
    tab.set_costs(&full);
    if !tab.optimize()? {
        return Ok(LpOutcome {
            status: LpStatus::Unbounded,
            x: tab.x[..n].to_vec(),
            objective: f64::NEG_INFINITY,
            iterations: tab.iterations,
        });
    }
    tab.refresh_basic();

    let mut x = tab.x[..n].to_vec();
    for (j, xj) in x.iter_mut().enumerate() {
        // snap tiny drift back onto the bounds
        if (*xj - lower[j]).abs() < 1e-11 {
            *xj = lower[j];
        } else if (*xj - upper[j]).abs() < 1e-11 {
            *xj = upper[j];
        }
        *xj = xj.clamp(lower[j], upper[j]);
    }
    let objective = costs.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpOutcome {
        status: LpStatus::Optimal,
        x,
        objective,
        iterations: tab.iterations,
    })
}
