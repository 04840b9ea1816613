use microgrid_core::der::{aggregate_demand, simulate_population, Der, DerParams, DerState};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = DerParams> {
    (
        0.0..=1.0f64,
        0.0..=1.0f64,
        0.0..=100.0f64,
        -10.0..60.0f64,
        0.0..0.95f64,
        0.0..=1.0f64,
        0.1..20.0f64,
    )
        .prop_map(|(a, gamma, beta, p_max, soc_set, headroom, p_rated)| {
            let soc_max = soc_set + (1.0 - soc_set) * headroom.max(0.01);
            DerParams {
                a,
                gamma,
                beta,
                p_max,
                soc_set,
                soc_max: soc_max.min(1.0),
                p_rated,
            }
        })
}

fn der() -> impl Strategy<Value = Der> {
    (params(), 0.0..=1.0f64, any::<bool>()).prop_map(|(params, frac, enabled)| Der {
        class: 0,
        params,
        state: DerState {
            soc: frac * params.soc_max,
            enabled,
            on: false,
        },
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn soc_stays_within_bounds(
        mut pop in prop::collection::vec(der(), 1..8),
        prices in prop::collection::vec(-20.0..80.0f64, 1..30),
    ) {
        let t = simulate_population(&mut pop, &prices);
        for row in &t.soc {
            for (soc, d) in row.iter().zip(&pop) {
                prop_assert!(*soc >= 0.0 && *soc <= d.params.soc_max);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// Four-bit factors keep every product exact in double precision.
    #[test]
    fn decay_is_geometric_without_charging(
        a_num in 0u32..=16,
        soc_num in 0u32..=16,
        steps in 1usize..=10,
        enabled in any::<bool>(),
    ) {
        let a = a_num as f64 / 16.0;
        let soc0 = soc_num as f64 / 16.0;
        let params = DerParams { a, gamma: 0.5, beta: 40.0, p_max: 30.0, soc_set: 0.7, soc_max: 1.0, p_rated: 6.0 };
        let mut pop = vec![Der { class: 0, params, state: DerState { soc: soc0, enabled, on: false } }];
        // nobody pays more than p_max
        let t = simulate_population(&mut pop, &vec![31.0; steps]);
        for (k, row) in t.soc.iter().enumerate() {
            prop_assert_eq!(row[0], a.powi(k as i32 + 1) * soc0);
        }
        prop_assert!(t.demand.iter().all(|&d| d == 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn demand_falls_as_price_rises(
        pop in prop::collection::vec(der(), 1..40),
        p1 in -20.0..80.0f64,
        p2 in -20.0..80.0f64,
    ) {
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        prop_assert!(aggregate_demand(&pop, lo) >= aggregate_demand(&pop, hi));
    }
}
