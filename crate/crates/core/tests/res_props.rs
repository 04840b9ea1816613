use microgrid_core::res::{
    photo_current, res_series, wind_power, MidRange, PvModel, ResFleet, ResForecast, SolarPath,
    WtModel,
};
use proptest::prelude::*;

#[test]
fn standard_photo_current() {
    let pv = PvModel::default();
    assert_eq!(photo_current(1000.0, pv.t_s, &pv), 7.84);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn photo_current_scales_with_irradiance(g in 0.0..1500.0f64, t in -10.0..70.0f64, shift in -3i32..=3) {
        let pv = PvModel::default();
        let factor = 2f64.powi(shift);
        prop_assert_eq!(photo_current(g * factor, t, &pv), factor * photo_current(g, t, &pv));
    }

    #[test]
    fn photo_current_is_additive(g1 in 0.0..800.0f64, g2 in 0.0..800.0f64, t in -10.0..70.0f64) {
        let pv = PvModel::default();
        let sum = photo_current(g1 + g2, t, &pv);
        let parts = photo_current(g1, t, &pv) + photo_current(g2, t, &pv);
        prop_assert!((sum - parts).abs() <= 4.0 * f64::EPSILON * sum.abs());
    }

    #[test]
    fn wind_power_is_cubic(v in 0.0..40.0f64, area in 1.0..2e4f64, cp in 0.05..0.593f64) {
        let wt = WtModel { area, cp, ..WtModel::default() };
        let p = wt.aerodynamic_power(v);
        let p2 = wt.aerodynamic_power(2.0 * v);
        prop_assert!((p2 - 8.0 * p).abs() <= 1e-12 * p2.abs());
    }

    #[test]
    fn wind_power_stays_within_rating(v in 0.0..40.0f64) {
        let wt = WtModel::default();
        let p = wind_power(v, &wt, MidRange::Physics, 0.0).unwrap();
        prop_assert!((0.0..=wt.p_max).contains(&p));
    }
}

fn forecast_with_bounds() -> impl Strategy<Value = ResForecast> {
    (1usize..=24).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0..1200.0f64, n),
            prop::collection::vec(0.0..30.0f64, n),
            prop::collection::vec(0.0..600.0f64, n),
            prop::collection::vec(0.0..15.0f64, n),
        )
            .prop_map(|(irradiance, wind_speed, irr_dev, wind_dev)| ResForecast {
                irradiance,
                wind_speed,
                irr_uncertainty: Some(irr_dev),
                wind_uncertainty: Some(wind_dev),
                temperature: None,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn worst_case_never_exceeds_deterministic(f in forecast_with_bounds(), diode in any::<bool>()) {
        let fleet = ResFleet {
            solar_path: if diode { SolarPath::Diode } else { SolarPath::Ramp },
            ..ResFleet::default()
        };
        let det = res_series(&f, &fleet, false).unwrap();
        let worst = res_series(&f, &fleet, true).unwrap();
        for (w, d) in worst.iter().zip(&det) {
            prop_assert!(w <= d);
        }
    }
}
