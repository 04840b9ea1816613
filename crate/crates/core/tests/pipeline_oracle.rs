mod common;

use microgrid_core::oracle::reference_run;
use microgrid_core::{run_scenario, RunConfig};

#[test]
fn scheduler_matches_reference_on_small_configs() {
    for (i, cfg) in common::small_corpus(30).iter().enumerate() {
        let got = run_scenario(cfg).unwrap();
        let want = reference_run(cfg).unwrap();
        assert_eq!(got, want, "config {i}");
    }
}

fn scaled(cfg: &RunConfig, factor: f64) -> RunConfig {
    let mut out = cfg.clone();
    for u in &mut out.units {
        u.c_energy *= factor;
        u.c_start *= factor;
        u.c_noload *= factor;
    }
    out.horizon.j3_weight *= factor;
    out
}

#[test]
fn cost_scaling_keeps_decisions() {
    for (i, cfg) in common::small_corpus(30).iter().enumerate() {
        let base = run_scenario(cfg).unwrap();
        let big = run_scenario(&scaled(cfg, 7.0)).unwrap();
        for (a, b) in base.steps.iter().zip(&big.steps) {
            assert_eq!(a.clear_price, b.clear_price, "config {i} k {}", a.k);
            assert_eq!(a.dispatch, b.dispatch, "config {i} k {}", a.k);
        }
    }
}
