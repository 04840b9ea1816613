//! Receding-horizon scheduling of DG and BESS classes against DER demand.

mod dispatch;
mod mpc;

pub use dispatch::{
    build_dispatch_model, common_quantum, required_quanta, shortfall_penalty, unserved,
    ClassDispatch, ClassVars, CostParts, DispatchDecision, DispatchInputs, DispatchModel,
    SHORTFALL_PENALTY_FACTOR,
};
pub use mpc::{
    admissible_bids, evaluate_candidate, mpc_step, run_all_scenarios, run_prepared, run_scenario,
    Candidate, Forecasts, Prepared, SimState,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitKind {
    Dg,
    Bess,
}

/// A group of identical dispatchable units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitClass {
    pub name: String,
    pub kind: UnitKind,
    pub count: u32,
    /// Admissible non-zero output levels, ascending, kW.
    pub bid_ladder: Vec<f64>,
    /// Production cost, $ per kW per interval.
    pub c_energy: f64,
    /// Cost per unit start.
    #[serde(default)]
    pub c_start: f64,
    /// Cost per committed idle unit per interval.
    #[serde(default)]
    pub c_noload: f64,
    /// Energy available over the whole run, kWh.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_budget: Option<f64>,
}

impl UnitClass {
    /// Ten diesel units bidding 50 to 200 kW.
    pub fn default_dg() -> Self {
        Self {
            name: "dg".into(),
            kind: UnitKind::Dg,
            count: 10,
            bid_ladder: vec![50.0, 100.0, 150.0, 200.0],
            c_energy: 1.0,
            c_start: 2.0,
            c_noload: 1.0,
            energy_budget: None,
        }
    }

    /// Fifty storage units bidding 10 to 40 kW.
    pub fn default_bess() -> Self {
        Self {
            name: "bess".into(),
            kind: UnitKind::Bess,
            count: 50,
            bid_ladder: vec![10.0, 20.0, 30.0, 40.0],
            c_energy: 0.1,
            c_start: 0.0,
            c_noload: 0.0,
            energy_budget: None,
        }
    }

    /// Whether the class needs committed-count variables.
    pub fn tracks_commitment(&self) -> bool {
        self.c_start > 0.0 || self.c_noload > 0.0
    }

    pub fn capacity(&self) -> f64 {
        self.count as f64 * self.bid_ladder.last().copied().unwrap_or(0.0)
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        if self.count < 1 {
            return Err(Error::config(format!("{path}.count"), "must be at least 1"));
        }
        if self.bid_ladder.is_empty()
            || self.bid_ladder.iter().any(|b| !(b.is_finite() && *b > 0.0))
            || self.bid_ladder.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::config(
                format!("{path}.bid_ladder"),
                "must be non-empty, positive and strictly ascending",
            ));
        }
        for (name, v) in [
            ("c_energy", self.c_energy),
            ("c_start", self.c_start),
            ("c_noload", self.c_noload),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(
                    format!("{path}.{name}"),
                    "must be non-negative",
                ));
            }
        }
        if let Some(b) = self.energy_budget {
            if !(b.is_finite() && b >= 0.0) {
                return Err(Error::config(
                    format!("{path}.energy_budget"),
                    "must be non-negative",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HorizonMode {
    /// Horizon always ends at the last interval.
    #[default]
    Shrinking,
    /// Horizon covers a fixed number of intervals, cut at the last one.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HorizonConfig {
    pub n_k: usize,
    pub horizon_mode: HorizonMode,
    pub fixed_horizon_length: usize,
    /// Interval length, hours.
    pub interval_duration: f64,
    /// Dollar value of one unit of SOC in the objective.
    pub j3_weight: f64,
}

impl Default for HorizonConfig {
    fn default() -> Self {
        Self {
            n_k: 24,
            horizon_mode: HorizonMode::Shrinking,
            fixed_horizon_length: 24,
            interval_duration: 1.0,
            j3_weight: 1.0,
        }
    }
}

impl HorizonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_k < 1 {
            return Err(Error::config("horizon.n_k", "must be at least 1"));
        }
        if self.fixed_horizon_length < 1 {
            return Err(Error::config(
                "horizon.fixed_horizon_length",
                "must be at least 1",
            ));
        }
        if !(self.interval_duration.is_finite() && self.interval_duration > 0.0) {
            return Err(Error::config(
                "horizon.interval_duration",
                "must be positive",
            ));
        }
        if !(self.j3_weight.is_finite() && self.j3_weight >= 0.0) {
            return Err(Error::config("horizon.j3_weight", "must be non-negative"));
        }
        Ok(())
    }

    /// Prediction horizon length at interval `k`.
    pub fn length_at(&self, k: usize) -> usize {
        let left = self.n_k - k;
        match self.horizon_mode {
            HorizonMode::Shrinking => left,
            HorizonMode::Fixed => self.fixed_horizon_length.min(left),
        }
    }
}

/// Pricing and forecasting regime of a run.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(try_from = "u8", into = "u8")]
pub enum Scenario {
    /// Constant clearing price, SOC ignored.
    #[default]
    ConstantPrice,
    /// Clearing price chosen among bids.
    DynamicPrice,
    /// Dynamic price planned against worst-case RES.
    Robust,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [
        Scenario::ConstantPrice,
        Scenario::DynamicPrice,
        Scenario::Robust,
    ];

    pub fn number(self) -> u8 {
        match self {
            Scenario::ConstantPrice => 1,
            Scenario::DynamicPrice => 2,
            Scenario::Robust => 3,
        }
    }
}

impl TryFrom<u8> for Scenario {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Scenario::ConstantPrice),
            2 => Ok(Scenario::DynamicPrice),
            3 => Ok(Scenario::Robust),
            other => Err(format!("scenario must be 1, 2 or 3, got {other}")),
        }
    }
}

impl From<Scenario> for u8 {
    fn from(s: Scenario) -> u8 {
        s.number()
    }
}

/// Committed outcome of one interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub k: usize,
    /// $/MWh.
    pub clear_price: f64,
    /// Demand exceeded feeder capacity at every admissible price.
    pub over_capacity: bool,
    pub demand: f64,
    pub served: f64,
    pub unserved: f64,
    /// RES available in the realized (deterministic) forecast, kW.
    pub res_available: f64,
    /// RES series the plan was built against, kW.
    pub res_planned: f64,
    pub res_used: f64,
    pub dispatch: DispatchDecision,
    /// Output per unit class, kW.
    pub class_power: Vec<f64>,
    pub j1: f64,
    pub j2: f64,
    pub penalty: f64,
    /// Post-step SOC summed over the population.
    pub j3: f64,
    /// `j1 + j2 + penalty - w3 * j3` with the scenario's effective weight.
    pub j: f64,
    /// Mean post-step SOC per dissipation class.
    pub soc_mean: Vec<f64>,
    /// Mean willingness to pay per dissipation class at the start of the interval.
    pub price_mean: Vec<f64>,
    pub horizon: usize,
    pub candidates: usize,
    /// Solver runs that stopped at the node limit with an incumbent.
    pub node_limit_hits: usize,
}
