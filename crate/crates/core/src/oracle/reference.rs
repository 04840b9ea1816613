//! Straight-line reference run: every dispatch problem is solved by
//! exhaustive enumeration and every admissible price is tried.

use crate::config::RunConfig;
use crate::der::{compute_price, decide_on, step_soc, update_lockout, Der};
use crate::error::{Error, Result};
use crate::market::MarketConfig;
use crate::milp::{ConstraintSense, MilpModel, ObjectiveSense, VarId};
use crate::oracle::enumerate::enumerate_milp;
use crate::report::RunReport;
use crate::scheduler::{
    ClassDispatch, DispatchDecision, HorizonMode, Scenario, StepResult, UnitClass,
};

pub const MAX_DERS: usize = 20;
pub const MAX_CLASSES: usize = 2;
pub const MAX_INTERVALS: usize = 6;
/// Assignments allowed per enumerated dispatch model.
pub const MODEL_CAP: u128 = 5_000_000;

struct Setting<'a> {
    classes: &'a [UnitClass],
    quantum: f64,
    penalty: f64,
    interval_hours: f64,
}

struct Plan {
    decisions: Vec<DispatchDecision>,
    j1: f64,
    j2: f64,
    penalty: f64,
    j3: f64,
}

fn one_step(d: &mut Der, p_clear: f64) -> f64 {
    let price = compute_price(&d.state, &d.params);
    d.state.on = decide_on(price, p_clear);
    let load = if d.state.enabled && d.state.on {
        d.params.p_rated
    } else {
        0.0
    };
    d.state = step_soc(d.state, &d.params);
    d.state.enabled = update_lockout(&d.state, &d.params);
    load
}

/// Demand and summed post-step SOC per interval under a constant price.
fn simulate(population: &[Der], price: f64, h: usize) -> (Vec<f64>, f64) {
    let mut pop = population.to_vec();
    let mut demand = Vec::with_capacity(h);
    let mut soc_total = 0.0;
    for _ in 0..h {
        demand.push(pop.iter_mut().map(|d| one_step(d, price)).sum());
        soc_total += pop.iter().map(|d| d.state.soc).sum::<f64>();
    }
    (demand, soc_total)
}

fn load_at(population: &[Der], price: f64) -> f64 {
    population
        .iter()
        .filter(|d| d.state.enabled && compute_price(&d.state, &d.params) >= price)
        .map(|d| d.params.p_rated)
        .sum()
}

/// Prices worth trying and the over-capacity flag.
fn candidate_prices(
    population: &[Der],
    market: &MarketConfig,
    k: usize,
    scenario: Scenario,
) -> (Vec<f64>, bool) {
    let cap = market.capacity_at(k);
    if scenario == Scenario::ConstantPrice {
        let p = market.constant_price;
        return (vec![p], load_at(population, p) > cap);
    }
    let p_base = market.p_base_at(k);
    let bids = &market.price_bids;
    let (floor, over) = if load_at(population, p_base) <= cap {
        (p_base, false)
    } else {
        match bids.iter().find(|&&p| load_at(population, p) <= cap) {
            Some(&p) => (p, false),
            None => (*bids.last().expect("validated bids"), true),
        }
    };
    if over {
        return (vec![floor], true);
    }
    let admissible: Vec<f64> = bids.iter().copied().filter(|&p| p >= floor).collect();
    if admissible.is_empty() {
        (vec![floor], false)
    } else {
        (admissible, false)
    }
}

fn gcd_quantum(classes: &[UnitClass]) -> f64 {
    let mut g: u64 = 0;
    for c in classes {
        for &b in &c.bid_ladder {
            let mut x = (b * 1e6).round() as u64;
            let mut y = g;
            while x != 0 {
                let t = y % x;
                y = x;
                x = t;
            }
            g = y;
        }
    }
    g as f64 / 1e6
}

fn power_of(levels: &[u32], ladder: &[f64]) -> f64 {
    levels.iter().zip(ladder).map(|(&n, &b)| n as f64 * b).sum()
}

/// Fewest units, then the most units on the highest levels.
fn canonical(levels: &[u32], class: &UnitClass, quantum: f64) -> Vec<u32> {
    let target = (power_of(levels, &class.bid_ladder) / quantum).round() as i64;
    let steps: Vec<i64> = class
        .bid_ladder
        .iter()
        .map(|b| (b / quantum).round() as i64)
        .collect();
    let width = class.bid_ladder.len();
    let mut best: Option<Vec<u32>> = None;
    let mut cur = vec![0u32; width];
    loop {
        let units: u32 = cur.iter().sum();
        let total: i64 = cur.iter().zip(&steps).map(|(&n, &s)| n as i64 * s).sum();
        if units <= class.count && total == target {
            let better = match &best {
                None => true,
                Some(b) => {
                    let bu: u32 = b.iter().sum();
                    units < bu || (units == bu && cur.iter().rev().cmp(b.iter().rev()).is_gt())
                }
            };
            if better {
                best = Some(cur.clone());
            }
        }
        let mut j = 0;
        loop {
            if j == width {
                return best.unwrap_or_else(|| levels.to_vec());
            }
            if cur[j] < class.count {
                cur[j] += 1;
                break;
            }
            cur[j] = 0;
            j += 1;
        }
    }
}

struct Layout {
    n: Vec<Vec<Vec<VarId>>>,
    c: Vec<Vec<Option<VarId>>>,
    s: Vec<Vec<Option<VarId>>>,
}

fn plan_dispatch(
    set: &Setting<'_>,
    demand: &[f64],
    res: &[f64],
    prev: &[u32],
    energy_left: &[Option<f64>],
) -> Result<Vec<DispatchDecision>> {
    let h = demand.len();
    let q = set.quantum;
    let mut m = MilpModel::new(ObjectiveSense::Minimize);
    let mut obj = Vec::new();
    let mut lay = Layout {
        n: Vec::new(),
        c: Vec::new(),
        s: Vec::new(),
    };
    let cap_quanta: f64 = set
        .classes
        .iter()
        .map(|c| c.count as f64 * c.bid_ladder[c.bid_ladder.len() - 1] / q)
        .sum();
    let any_budget = energy_left.iter().any(|e| e.is_some());
    for k in 0..h {
        let (mut nk, mut ck, mut sk) = (Vec::new(), Vec::new(), Vec::new());
        for (i, class) in set.classes.iter().enumerate() {
            let hi = class.count as f64;
            let tracked = class.c_start > 0.0 || class.c_noload > 0.0;
            let mut levels = Vec::new();
            for &b in &class.bid_ladder {
                let v = m.integer(format!("n_{k}_{i}_{b}"), 0.0, hi)?;
                let noload = if tracked { class.c_noload } else { 0.0 };
                obj.push((v, class.c_energy * b - noload));
                levels.push(v);
            }
            let sum_terms: Vec<(VarId, f64)> = levels.iter().map(|&v| (v, 1.0)).collect();
            if tracked {
                let c = m.integer(format!("c_{k}_{i}"), 0.0, hi)?;
                obj.push((c, class.c_noload));
                let mut t = sum_terms;
                t.push((c, -1.0));
                m.add_constraint(format!("on_{k}_{i}"), t, ConstraintSense::Le, 0.0)?;
                let s = if class.c_start > 0.0 {
                    let s = m.integer(format!("s_{k}_{i}"), 0.0, hi)?;
                    obj.push((s, class.c_start));
                    if k == 0 {
                        m.add_constraint(
                            format!("st_{k}_{i}"),
                            vec![(c, 1.0), (s, -1.0)],
                            ConstraintSense::Le,
                            prev[i] as f64,
                        )?;
                    } else {
                        let before = lay.c[k - 1][i].expect("tracked class");
                        m.add_constraint(
                            format!("st_{k}_{i}"),
                            vec![(c, 1.0), (before, -1.0), (s, -1.0)],
                            ConstraintSense::Le,
                            0.0,
                        )?;
                    }
                    Some(s)
                } else {
                    None
                };
                ck.push(Some(c));
                sk.push(s);
            } else {
                m.add_constraint(format!("cnt_{k}_{i}"), sum_terms, ConstraintSense::Le, hi)?;
                ck.push(None);
                sk.push(None);
            }
            nk.push(levels);
        }
        let residual = demand[k] - res[k];
        if residual > 0.0 {
            let x = residual / q;
            let need = (x - 1e-9 * x.max(1.0)).ceil();
            let mut terms = Vec::new();
            for (class, levels) in set.classes.iter().zip(&nk) {
                for (&v, &b) in levels.iter().zip(&class.bid_ladder) {
                    terms.push((v, b / q));
                }
            }
            let slack_hi = if any_budget {
                need
            } else {
                (need - cap_quanta).max(0.0).ceil()
            };
            if slack_hi > 0.0 {
                let u = m.integer(format!("u_{k}"), 0.0, slack_hi)?;
                obj.push((u, set.penalty * q));
                terms.push((u, 1.0));
                let part = need * q - residual;
                if part > 0.0 {
                    let z = m.integer(format!("z_{k}"), 0.0, 1.0)?;
                    obj.push((z, -set.penalty * part));
                    m.add_constraint(
                        format!("zu_{k}"),
                        vec![(z, 1.0), (u, -1.0)],
                        ConstraintSense::Le,
                        0.0,
                    )?;
                }
            }
            if need > 0.0 {
                m.add_constraint(format!("bal_{k}"), terms, ConstraintSense::Ge, need)?;
            }
        }
        lay.n.push(nk);
        lay.c.push(ck);
        lay.s.push(sk);
    }
    for (i, class) in set.classes.iter().enumerate() {
        if let Some(left) = energy_left[i] {
            let mut terms = Vec::new();
            for k in 0..h {
                for (&v, &b) in lay.n[k][i].iter().zip(&class.bid_ladder) {
                    terms.push((v, b * set.interval_hours));
                }
            }
            m.add_constraint(format!("e_{i}"), terms, ConstraintSense::Le, left.max(0.0))?;
        }
    }
    m.set_objective(obj)?;

    let report = enumerate_milp(&m, MODEL_CAP, 1e-7)?;
    let x = report
        .best()
        .ok_or_else(|| Error::Numerical("reference dispatch model is infeasible".into()))?;
    let val = |v: VarId| x[v.0].round() as u32;
    let mut out = Vec::with_capacity(h);
    let mut before = prev.to_vec();
    for k in 0..h {
        let mut classes = Vec::new();
        for (i, class) in set.classes.iter().enumerate() {
            let mut producing: Vec<u32> = lay.n[k][i].iter().map(|&v| val(v)).collect();
            let committed = match lay.c[k][i] {
                Some(c) => val(c),
                None => {
                    producing = canonical(&producing, class, q);
                    producing.iter().sum()
                }
            };
            let started = match lay.s[k][i] {
                Some(s) => val(s),
                None => committed.saturating_sub(before[i]),
            };
            classes.push(ClassDispatch {
                producing,
                committed,
                started,
            });
        }
        before = classes.iter().map(|c| c.committed).collect();
        out.push(DispatchDecision { classes });
    }
    Ok(out)
}

/// `(j1, j2, penalty)` of one interval.
fn interval_cost(set: &Setting<'_>, d: &DispatchDecision, residual: f64) -> (f64, f64, f64) {
    let (mut j1, mut j2, mut supply) = (0.0, 0.0, 0.0);
    for (cd, class) in d.classes.iter().zip(set.classes) {
        let p = power_of(&cd.producing, &class.bid_ladder);
        j1 += class.c_energy * p;
        let producing: u32 = cd.producing.iter().sum();
        let idle = cd.committed.saturating_sub(producing);
        j2 += class.c_start * cd.started as f64 + class.c_noload * idle as f64;
    }
    for (cd, class) in d.classes.iter().zip(set.classes) {
        supply += power_of(&cd.producing, &class.bid_ladder);
    }
    (j1, j2, set.penalty * (residual - supply).max(0.0))
}

fn means(population: &[Der], n: usize, f: impl Fn(&Der) -> f64) -> Vec<f64> {
    let mut sums = vec![0.0; n];
    let mut counts = vec![0usize; n];
    for d in population {
        sums[d.class] += f(d);
        counts[d.class] += 1;
    }
    (0..n)
        .map(|i| {
            if counts[i] == 0 {
                0.0
            } else {
                sums[i] / counts[i] as f64
            }
        })
        .collect()
}

/// Brute-force counterpart of [`crate::scheduler::run_scenario`] for small
/// configurations.
pub fn reference_run(config: &RunConfig) -> Result<RunReport> {
    let p = config.prepare()?;
    if p.population.len() > MAX_DERS
        || p.classes.len() > MAX_CLASSES
        || p.horizon.n_k > MAX_INTERVALS
    {
        return Err(Error::Input(format!(
            "reference run handles at most {MAX_DERS} DERs, {MAX_CLASSES} unit classes and \
             {MAX_INTERVALS} intervals"
        )));
    }
    let classes = &p.classes;
    let dearest = classes.iter().map(|c| c.c_energy).fold(0.0, f64::max);
    let set = Setting {
        classes,
        quantum: gcd_quantum(classes),
        penalty: 1e3 * if dearest > 0.0 { dearest } else { 1.0 },
        interval_hours: p.horizon.interval_duration,
    };
    let w3 = if p.scenario == Scenario::ConstantPrice {
        0.0
    } else {
        p.horizon.j3_weight
    };
    let plan_res = if p.scenario == Scenario::Robust {
        &p.forecasts.worst_case
    } else {
        &p.forecasts.deterministic
    };
    let n_der = p.der_classes.len();

    let mut pop = p.population.clone();
    let mut prev = vec![0u32; classes.len()];
    let mut left: Vec<Option<f64>> = classes.iter().map(|c| c.energy_budget).collect();
    let mut steps = Vec::new();
    for k in 0..p.horizon.n_k {
        let h = match p.horizon.horizon_mode {
            HorizonMode::Shrinking => p.horizon.n_k - k,
            HorizonMode::Fixed => p.horizon.fixed_horizon_length.min(p.horizon.n_k - k),
        };
        let res = &plan_res[k..k + h];
        let (prices, over_capacity) = candidate_prices(&pop, &p.market, k, p.scenario);

        let mut best: Option<(f64, f64, Plan)> = None;
        for &price in &prices {
            let (demand, j3) = simulate(&pop, price, h);
            let decisions = plan_dispatch(&set, &demand, res, &prev, &left)?;
            let (mut j1, mut j2, mut pen) = (0.0, 0.0, 0.0);
            for (t, d) in decisions.iter().enumerate() {
                let (a, b, c) = interval_cost(&set, d, demand[t] - res[t]);
                j1 += a;
                j2 += b;
                pen += c;
            }
            let total = j1 + j2 + pen - w3 * j3;
            let replace = match &best {
                None => true,
                Some((b, _, _)) => total < b - 1e-9 * b.abs().max(1.0),
            };
            if replace {
                best = Some((
                    total,
                    price,
                    Plan {
                        decisions,
                        j1,
                        j2,
                        penalty: pen,
                        j3,
                    },
                ));
            }
        }
        let (_, price, plan) = best.expect("at least one price");
        debug_assert!(plan.j1 >= 0.0 && plan.j2 >= 0.0 && plan.penalty >= 0.0 && plan.j3 >= 0.0);

        let price_mean = means(&pop, n_der, |d| compute_price(&d.state, &d.params));
        let demand: f64 = pop.iter_mut().map(|d| one_step(d, price)).sum();
        let j3: f64 = pop.iter().map(|d| d.state.soc).sum();
        let soc_mean = means(&pop, n_der, |d| d.state.soc);

        let first = plan
            .decisions
            .into_iter()
            .next()
            .expect("horizon of at least one");
        let class_power: Vec<f64> = first
            .classes
            .iter()
            .zip(classes.iter())
            .map(|(cd, c)| power_of(&cd.producing, &c.bid_ladder))
            .collect();
        let supply: f64 = class_power.iter().sum();
        let res_available = p.forecasts.deterministic[k];
        let short = (demand - res_available - supply).max(0.0);
        let (j1, j2, pen) = interval_cost(&set, &first, demand - res_available);
        for (i, &pw) in class_power.iter().enumerate() {
            if let Some(l) = left[i].as_mut() {
                *l = (*l - pw * p.horizon.interval_duration).max(0.0);
            }
        }
        prev = first.classes.iter().map(|c| c.committed).collect();
        steps.push(StepResult {
            k,
            clear_price: price,
            over_capacity,
            demand,
            served: demand - short,
            unserved: short,
            res_available,
            res_planned: res[0],
            res_used: (demand - supply).max(0.0).min(res_available),
            dispatch: first,
            class_power,
            j1,
            j2,
            penalty: pen,
            j3,
            j: j1 + j2 + pen - w3 * j3,
            soc_mean,
            price_mean,
            horizon: h,
            candidates: prices.len(),
            node_limit_hits: 0,
        });
    }
    let worst = p.forecasts.worst_case[..steps.len()].to_vec();
    Ok(RunReport::from_parts(
        p.scenario,
        p.der_classes.clone(),
        p.classes.clone(),
        p.horizon.interval_duration,
        w3,
        worst,
        steps,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_prefers_fewer_then_higher() {
        let class = UnitClass {
            name: "b".into(),
            kind: crate::scheduler::UnitKind::Bess,
            count: 4,
            bid_ladder: vec![10.0, 20.0, 30.0],
            c_energy: 0.1,
            c_start: 0.0,
            c_noload: 0.0,
            energy_budget: None,
        };
        // 40 kW: 30 + 10 and 20 + 20 both use two units; the higher level wins
        assert_eq!(canonical(&[4, 0, 0], &class, 10.0), vec![1, 0, 1]);
        assert_eq!(canonical(&[0, 0, 0], &class, 10.0), vec![0, 0, 0]);
    }
}
