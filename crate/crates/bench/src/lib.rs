//! Fixtures shared by the benchmarks.

use microgrid_core::der::simulate_population;
use microgrid_core::scheduler::{build_dispatch_model, DispatchInputs, DispatchModel, Prepared};
use microgrid_core::RunConfig;

/// The preset scenario-2 run, fully prepared.
pub fn prepared_preset() -> Prepared {
    let mut cfg = RunConfig::preset();
    cfg.scenario = microgrid_core::Scenario::DynamicPrice;
    cfg.prepare().expect("preset prepares")
}

/// Full-day dispatch model for the preset under a constant clearing price.
pub fn preset_dispatch_model(price: f64) -> DispatchModel {
    let p = prepared_preset();
    let mut pop = p.population.clone();
    let traj = simulate_population(&mut pop, &vec![price; p.horizon.n_k]);
    let left: Vec<Option<f64>> = p.classes.iter().map(|c| c.energy_budget).collect();
    build_dispatch_model(&DispatchInputs {
        demand: &traj.demand,
        res: &vec![0.0; p.horizon.n_k],
        classes: &p.classes,
        prev_committed: &vec![0; p.classes.len()],
        energy_left: &left,
        interval_hours: p.horizon.interval_duration,
    })
    .expect("dispatch model builds")
}
