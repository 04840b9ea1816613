use microgrid_core::market::{clear_price, DemandCurve};
use proptest::prelude::*;

fn offers() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec(
        ((-4i32..=12).prop_map(|p| p as f64 * 5.0), 0.5..20.0f64),
        0..30,
    )
}

/// Summed highest willingness first, the order the curve accumulates in.
fn brute_demand(offers: &[(f64, f64)], price: f64) -> f64 {
    let mut taken: Vec<(f64, f64)> = offers.iter().copied().filter(|o| o.0 >= price).collect();
    taken.sort_by(|a, b| b.0.total_cmp(&a.0));
    taken.iter().map(|o| o.1).sum()
}

fn three_bids() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(-2i32..=12, 3)
        .prop_map(|s| s.into_iter().map(|p| p as f64 * 5.0).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn clearing_matches_enumeration(
        offers in offers(),
        bids in three_bids(),
        p_base in (-2i32..=12).prop_map(|p| p as f64 * 5.0),
        capacity in 1.0..300.0f64,
    ) {
        let curve = DemandCurve::from_offers(offers.clone());
        let got = clear_price(&curve, p_base, capacity, &bids).unwrap();

        prop_assert!(got.price == p_base || bids.contains(&got.price));
        if !got.over_capacity {
            prop_assert!(curve.demand(got.price) <= capacity);
        }

        let expected = if brute_demand(&offers, p_base) <= capacity {
            (p_base, false)
        } else {
            bids.iter()
                .find(|&&b| brute_demand(&offers, b) <= capacity)
                .map_or((bids[2], true), |&b| (b, false))
        };
        prop_assert_eq!((got.price, got.over_capacity), expected);
    }

    #[test]
    fn curve_matches_offer_sums(offers in offers(), price in -30.0..70.0f64) {
        let curve = DemandCurve::from_offers(offers.clone());
        let brute = brute_demand(&offers, price);
        prop_assert!((curve.demand(price) - brute).abs() <= 1e-9 * brute.max(1.0));
    }
}
