use rayon::prelude::*;

use crate::config::RunConfig;
use crate::der::{compute_price, simulate_population, Der, Trajectory};
use crate::error::{Error, Result};
use crate::market::{
    build_demand_curve, clear_price, enumerate_price_plans, Clearing, MarketConfig,
};
use crate::milp::{solve_milp, SolveOptions, SolveStatus};
use crate::report::RunReport;
use crate::scheduler::dispatch::{
    build_dispatch_model, unserved, CostParts, DispatchDecision, DispatchInputs,
};
use crate::scheduler::{HorizonConfig, Scenario, StepResult, UnitClass};

/// RES series over the whole run, kW.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecasts {
    pub deterministic: Vec<f64>,
    /// Lower envelope; equal to `deterministic` without uncertainty bounds.
    pub worst_case: Vec<f64>,
}

/// Everything a run needs, with forecasts resolved and the population built.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub scenario: Scenario,
    pub population: Vec<Der>,
    /// Dissipation factor of every population class.
    pub der_classes: Vec<f64>,
    pub classes: Vec<UnitClass>,
    pub market: MarketConfig,
    pub horizon: HorizonConfig,
    pub forecasts: Forecasts,
    pub solve: SolveOptions,
}

impl Prepared {
    /// SOC weight actually used; the constant-price scenario ignores SOC.
    pub fn effective_j3_weight(&self) -> f64 {
        match self.scenario {
            Scenario::ConstantPrice => 0.0,
            _ => self.horizon.j3_weight,
        }
    }

    pub fn planning_res(&self) -> &[f64] {
        match self.scenario {
            Scenario::Robust => &self.forecasts.worst_case,
            _ => &self.forecasts.deterministic,
        }
    }
}

/// State carried from one interval to the next.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub population: Vec<Der>,
    pub prev_committed: Vec<u32>,
    pub energy_left: Vec<Option<f64>>,
}

impl SimState {
    pub fn new(prepared: &Prepared) -> Self {
        Self {
            population: prepared.population.clone(),
            prev_committed: vec![0; prepared.classes.len()],
            energy_left: prepared.classes.iter().map(|c| c.energy_budget).collect(),
        }
    }
}

/// One evaluated price plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub plan: Vec<f64>,
    /// `costs.total() - w3 * j3`.
    pub total: f64,
    pub costs: CostParts,
    pub j3: f64,
    pub dispatch: Vec<DispatchDecision>,
    pub trajectory: Trajectory,
    pub node_limit_hits: usize,
}

impl Candidate {
    pub fn first(&self) -> &DispatchDecision {
        &self.dispatch[0]
    }
}

/// Bids the market admits at the current population state, ascending.
pub fn admissible_bids(
    population: &[Der],
    market: &MarketConfig,
    k: usize,
) -> Result<(Vec<f64>, Clearing)> {
    let curve = build_demand_curve(population);
    let floor = clear_price(
        &curve,
        market.p_base_at(k),
        market.capacity_at(k),
        &market.price_bids,
    )?;
    let bids: Vec<f64> = if floor.over_capacity {
        vec![floor.price]
    } else {
        market
            .price_bids
            .iter()
            .copied()
            .filter(|&p| p >= floor.price)
            .collect()
    };
    if bids.is_empty() {
        return Ok((vec![floor.price], floor));
    }
    Ok((bids, floor))
}

/// Simulate a price plan on a copy of the population and dispatch against it.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_candidate(
    plan: &[f64],
    population: &[Der],
    res: &[f64],
    classes: &[UnitClass],
    prev_committed: &[u32],
    energy_left: &[Option<f64>],
    horizon: &HorizonConfig,
    j3_weight: f64,
    solve: &SolveOptions,
) -> Result<Candidate> {
    let mut pop = population.to_vec();
    let trajectory = simulate_population(&mut pop, plan);
    let j3 = trajectory.soc_sum();
    let dm = build_dispatch_model(&DispatchInputs {
        demand: &trajectory.demand,
        res,
        classes,
        prev_committed,
        energy_left,
        interval_hours: horizon.interval_duration,
    })?;
    let sol = solve_milp(&dm.model, solve)?;
    if !sol.has_solution() {
        return Err(Error::Numerical(format!(
            "dispatch model without solution ({:?})",
            sol.status
        )));
    }
    let dispatch = dm.decode_all(classes, &sol.values, prev_committed);
    let mut costs = CostParts::default();
    for (k, d) in dispatch.iter().enumerate() {
        costs.add(d.cost(classes, trajectory.demand[k] - res[k], dm.penalty));
    }
    Ok(Candidate {
        plan: plan.to_vec(),
        total: costs.total() - j3_weight * j3,
        costs,
        j3,
        dispatch,
        trajectory,
        node_limit_hits: usize::from(sol.status == SolveStatus::NodeLimit),
    })
}

/// Lowest total wins; totals within a relative 1e-9 count as tied and the
/// earlier (cheaper) plan is kept.
pub(crate) fn pick_best(totals: impl IntoIterator<Item = (usize, f64)>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, t) in totals {
        match best {
            Some((_, b)) if t >= b - 1e-9 * b.abs().max(1.0) => {}
            _ => best = Some((i, t)),
        }
    }
    best.map(|(i, _)| i)
}

pub(crate) fn class_means(
    population: &[Der],
    n_classes: usize,
    value: impl Fn(&Der) -> f64,
) -> Vec<f64> {
    let mut sum = vec![0.0; n_classes];
    let mut count = vec![0usize; n_classes];
    for d in population {
        sum[d.class] += value(d);
        count[d.class] += 1;
    }
    sum.iter()
        .zip(&count)
        .map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect()
}

pub fn mpc_step(state: &mut SimState, prepared: &Prepared, k: usize) -> Result<StepResult> {
    if k >= prepared.horizon.n_k {
        return Err(Error::Input(format!(
            "interval {k} outside a {}-interval run",
            prepared.horizon.n_k
        )));
    }
    let h = prepared.horizon.length_at(k);
    let res = &prepared.planning_res()[k..k + h];
    let w3 = prepared.effective_j3_weight();

    let (bids, over_capacity) = match prepared.scenario {
        Scenario::ConstantPrice => {
            let curve = build_demand_curve(&state.population);
            let p = prepared.market.constant_price;
            (vec![p], curve.demand(p) > prepared.market.capacity_at(k))
        }
        _ => {
            let (bids, clearing) = admissible_bids(&state.population, &prepared.market, k)?;
            (bids, clearing.over_capacity)
        }
    };
    let plans = enumerate_price_plans(&bids, h);
    let evaluated: Vec<Candidate> = plans
        .par_iter()
        .map(|plan| {
            evaluate_candidate(
                plan,
                &state.population,
                res,
                &prepared.classes,
                &state.prev_committed,
                &state.energy_left,
                &prepared.horizon,
                w3,
                &prepared.solve,
            )
        })
        .collect::<Result<_>>()?;
    let best = pick_best(evaluated.iter().enumerate().map(|(i, c)| (i, c.total)))
        .ok_or_else(|| Error::Input("no candidate price plans".into()))?;
    let chosen = &evaluated[best];
    let p_clear = chosen.plan[0];
    let n_der_classes = prepared.der_classes.len();

    let price_mean = class_means(&state.population, n_der_classes, |d| {
        compute_price(&d.state, &d.params)
    });
    let demand: f64 = state
        .population
        .iter_mut()
        .map(|d| d.advance(p_clear))
        .sum();
    let j3: f64 = state.population.iter().map(|d| d.state.soc).sum();
    let soc_mean = class_means(&state.population, n_der_classes, |d| d.state.soc);

    let dispatch = chosen.first().clone();
    let classes = &prepared.classes;
    let class_power: Vec<f64> = dispatch
        .classes
        .iter()
        .zip(classes)
        .map(|(d, c)| d.power(c))
        .collect();
    let supply: f64 = class_power.iter().sum();
    let res_available = prepared.forecasts.deterministic[k];
    let res_used = (demand - supply).max(0.0).min(res_available);
    let short = unserved(demand - res_available, supply);
    let penalty_rate = crate::scheduler::shortfall_penalty(classes);
    let costs = dispatch.cost(classes, demand - res_available, penalty_rate);

    for (i, (c, &p)) in classes.iter().zip(&class_power).enumerate() {
        if let Some(left) = state.energy_left[i].as_mut() {
            *left = (*left - p * prepared.horizon.interval_duration).max(0.0);
        }
        debug_assert!(dispatch.classes[i].committed <= c.count);
    }
    state.prev_committed = dispatch.classes.iter().map(|d| d.committed).collect();

    Ok(StepResult {
        k,
        clear_price: p_clear,
        over_capacity,
        demand,
        served: demand - short,
        unserved: short,
        res_available,
        res_planned: res[0],
        res_used,
        dispatch,
        class_power,
        j1: costs.j1,
        j2: costs.j2,
        penalty: costs.penalty,
        j3,
        j: costs.j1 + costs.j2 + costs.penalty - w3 * j3,
        soc_mean,
        price_mean,
        horizon: h,
        candidates: evaluated.len(),
        node_limit_hits: evaluated.iter().map(|c| c.node_limit_hits).sum(),
    })
}

pub fn run_prepared(prepared: &Prepared) -> Result<RunReport> {
    let mut state = SimState::new(prepared);
    let mut steps = Vec::with_capacity(prepared.horizon.n_k);
    for k in 0..prepared.horizon.n_k {
        steps.push(mpc_step(&mut state, prepared, k)?);
    }
    Ok(RunReport::new(prepared, steps))
}

pub fn run_scenario(config: &RunConfig) -> Result<RunReport> {
    run_prepared(&config.prepare()?)
}

/// Run every scenario on one configuration, concurrently, in scenario order.
pub fn run_all_scenarios(config: &RunConfig) -> Result<Vec<RunReport>> {
    Scenario::ALL
        .par_iter()
        .map(|&s| {
            let mut cfg = config.clone();
            cfg.scenario = s;
            run_scenario(&cfg)
        })
        .collect()
}
