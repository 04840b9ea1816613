#![allow(dead_code)]

use microgrid_core::milp::{ConstraintSense, MilpModel, ObjectiveSense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random bounded integer model with at most 12 variables and 10 rows,
/// sized so that exhaustive enumeration stays below `cap` assignments.
pub fn random_integer_model(seed: u64, cap: u64) -> MilpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sense = if rng.random_bool(0.5) {
        ObjectiveSense::Minimize
    } else {
        ObjectiveSense::Maximize
    };
    let mut m = MilpModel::new(sense);
    let n = rng.random_range(1..=12usize);
    let mut product: u64 = 1;
    let mut vars = Vec::new();
    for i in 0..n {
        let remaining = (n - i) as u32;
        let budget = ((cap / product) as f64)
            .powf(1.0 / remaining as f64)
            .floor() as u64;
        let size = rng.random_range(1..=budget.clamp(1, 6));
        product *= size;
        let lo = rng.random_range(-2..=1i64) as f64;
        vars.push(
            m.integer(format!("x{i}"), lo, lo + (size - 1) as f64)
                .unwrap(),
        );
    }
    // objective coefficients: plain integers or two-decimal values
    let decimals = rng.random_bool(0.3);
    let coef = |rng: &mut ChaCha8Rng| -> f64 {
        if decimals {
            rng.random_range(-900..=900i64) as f64 / 100.0
        } else {
            rng.random_range(-9..=9i64) as f64
        }
    };
    let obj = vars.iter().map(|&v| (v, coef(&mut rng))).collect();
    m.set_objective(obj).unwrap();
    let rows = rng.random_range(0..=10usize);
    for r in 0..rows {
        let mut terms = Vec::new();
        for &v in &vars {
            if rng.random_bool(0.6) {
                terms.push((v, rng.random_range(-5..=5i64) as f64));
            }
        }
        if terms.is_empty() {
            continue;
        }
        let sense = match rng.random_range(0..10) {
            0 => ConstraintSense::Eq,
            1..=5 => ConstraintSense::Le,
            _ => ConstraintSense::Ge,
        };
        let rhs = rng.random_range(-6..=8i64) as f64;
        m.add_constraint(format!("r{r}"), terms, sense, rhs)
            .unwrap();
    }
    m
}

use microgrid_core::config::SeriesSource;
use microgrid_core::der::DerClass;
use microgrid_core::res::{ResFleet, WtModel};
use microgrid_core::scheduler::{HorizonMode, Scenario, UnitClass, UnitKind};
use microgrid_core::RunConfig;

/// Assignments the reference run may enumerate per dispatch model.
const SMALL_MODEL_BUDGET: f64 = 1e5;

fn two_decimals(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo..hi) * 1000.0).round() / 1000.0
}

/// Ladder whose sums of up to two units are all distinct.
fn small_ladder(rng: &mut ChaCha8Rng, levels: usize) -> Vec<f64> {
    let first = 10.0 * rng.random_range(1..=4) as f64;
    if levels == 1 {
        return vec![first];
    }
    let mut second = first + 10.0 * rng.random_range(1..=3) as f64;
    if second == 2.0 * first {
        second += 10.0;
    }
    vec![first, second]
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn interval_domain(c: &UnitClass) -> f64 {
    let size = c.count as f64 + 1.0;
    let mut d = size.powi(c.bid_ladder.len() as i32);
    if c.c_start > 0.0 || c.c_noload > 0.0 {
        d *= size;
    }
    if c.c_start > 0.0 {
        d *= size;
    }
    d
}

/// Small randomized configuration the brute-force reference can handle.
pub fn small_config(seed: u64, scenario: Scenario) -> RunConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0000);
    let mut cfg = RunConfig {
        scenario,
        ..RunConfig::default()
    };

    let pop = &mut cfg.population;
    pop.count = rng.random_range(3..=20);
    pop.seed = seed;
    let n_classes = rng.random_range(1..=3);
    pop.classes = (0..n_classes)
        .map(|_| DerClass {
            a: two_decimals(&mut rng, 0.55, 0.95),
            fraction: rng.random_range(0.2..1.0),
        })
        .collect();
    pop.gamma = two_decimals(&mut rng, 0.3, 1.0);
    pop.beta = two_decimals(&mut rng, 10.0, 40.0);
    pop.p_max = two_decimals(&mut rng, 25.0, 45.0);
    pop.soc_set = two_decimals(&mut rng, 0.5, 0.9);
    pop.soc_max = 1.0;
    pop.p_rated = two_decimals(&mut rng, 5.0, 20.0);

    let mut units = Vec::new();
    if rng.random_bool(0.8) {
        let levels = rng.random_range(1..=2);
        units.push(UnitClass {
            name: "dg".into(),
            kind: UnitKind::Dg,
            count: rng.random_range(1..=2),
            bid_ladder: small_ladder(&mut rng, levels),
            c_energy: two_decimals(&mut rng, 0.5, 2.0),
            c_start: if rng.random_bool(0.8) {
                two_decimals(&mut rng, 0.5, 5.0)
            } else {
                0.0
            },
            c_noload: two_decimals(&mut rng, 0.2, 2.0),
            energy_budget: None,
        });
    }
    if units.is_empty() || rng.random_bool(0.6) {
        let levels = rng.random_range(1..=2);
        units.push(UnitClass {
            name: "bess".into(),
            kind: UnitKind::Bess,
            count: rng.random_range(1..=if levels == 1 { 3 } else { 2 }),
            bid_ladder: small_ladder(&mut rng, levels),
            c_energy: two_decimals(&mut rng, 0.05, 0.5),
            c_start: 0.0,
            c_noload: 0.0,
            energy_budget: rng
                .random_bool(0.25)
                .then(|| 10.0 * rng.random_range(1..=8) as f64),
        });
    }
    // shortfall slack and its indicator
    let quantum = units
        .iter()
        .flat_map(|u| u.bid_ladder.iter().map(|b| *b as u64))
        .fold(0, gcd) as f64;
    let peak = cfg.population.p_rated * cfg.population.count as f64;
    let capacity: f64 = units
        .iter()
        .map(|u| u.count as f64 * u.bid_ladder[u.bid_ladder.len() - 1])
        .sum();
    let short = if units.iter().any(|u| u.energy_budget.is_some()) {
        peak
    } else {
        (peak - capacity).max(0.0)
    };
    let slack_domain = 2.0 * ((short / quantum).ceil() + 1.0);
    let domain: f64 = units.iter().map(interval_domain).product::<f64>() * slack_domain;
    let max_h = ((SMALL_MODEL_BUDGET.ln() / domain.ln()).floor() as usize).max(1);
    cfg.units = units;

    let n_k = rng.random_range(2..=6);
    cfg.horizon.n_k = n_k;
    cfg.horizon.j3_weight = two_decimals(&mut rng, 0.0, 3.0);
    if n_k <= max_h {
        cfg.horizon.horizon_mode = HorizonMode::Shrinking;
    } else {
        cfg.horizon.horizon_mode = HorizonMode::Fixed;
        cfg.horizon.fixed_horizon_length = max_h;
    }

    let mut bids: Vec<f64> = vec![10.0, 15.0, 20.0, 25.0, 30.0, 35.0]
        .into_iter()
        .filter(|_| rng.random_bool(0.5))
        .collect();
    if bids.is_empty() {
        bids.push(15.0);
    }
    cfg.market.constant_price = bids[rng.random_range(0..bids.len())];
    cfg.market.p_base = vec![bids[0]];
    cfg.market.feeder_capacity = vec![two_decimals(&mut rng, 0.2, 1.2) * peak];
    cfg.market.price_bids = bids;

    let wind_cap = two_decimals(&mut rng, 0.5, 10.0);
    cfg.res = ResFleet {
        wind: vec![WtModel {
            p_max: wind_cap,
            area: 20.0,
            ..WtModel::default()
        }],
        ..ResFleet::default()
    };
    cfg.res.pv.p_max = two_decimals(&mut rng, 0.5, 10.0);
    cfg.forecast.irradiance = Some(SeriesSource::Values(
        (0..n_k)
            .map(|_| two_decimals(&mut rng, 0.0, 1000.0))
            .collect(),
    ));
    cfg.forecast.wind_speed = Some(SeriesSource::Values(
        (0..n_k)
            .map(|_| two_decimals(&mut rng, 0.0, 20.0))
            .collect(),
    ));
    cfg.forecast.relative_uncertainty = Some(two_decimals(&mut rng, 0.0, 0.5));
    cfg
}

/// The small-config corpus: `count` seeds, each under every scenario.
pub fn small_corpus(count: u64) -> Vec<RunConfig> {
    let mut out = Vec::new();
    for seed in 0..count {
        for s in Scenario::ALL {
            out.push(small_config(seed, s));
        }
    }
    out
}
