//! Price-versus-demand curve and feeder-limited market clearing.

use serde::{Deserialize, Serialize};

use crate::der::{compute_price, Der};
use crate::error::{Error, Result};

/// Right-continuous step function from price to chargeable load.
///
/// `breakpoints[j] = (p_j, d_j)` means demand is `d_j` for prices in
/// `(p_{j-1}, p_j]`; above the last breakpoint demand is zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DemandCurve {
    breakpoints: Vec<(f64, f64)>,
}

impl DemandCurve {
    /// Build from `(willingness to pay, load)` offers.
    pub fn from_offers(mut offers: Vec<(f64, f64)>) -> Self {
        offers.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut desc: Vec<(f64, f64)> = Vec::new();
        let mut cumulative = 0.0;
        for (price, load) in offers {
            cumulative += load;
            match desc.last_mut() {
                Some(last) if last.0 == price => last.1 = cumulative,
                _ => desc.push((price, cumulative)),
            }
        }
        desc.reverse();
        Self { breakpoints: desc }
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    /// Load of all offers whose price is at least `price`, kW.
    pub fn demand(&self, price: f64) -> f64 {
        let j = self.breakpoints.partition_point(|&(p, _)| p < price);
        self.breakpoints.get(j).map_or(0.0, |&(_, d)| d)
    }
}

/// Curve of the currently enabled DERs.
pub fn build_demand_curve(population: &[Der]) -> DemandCurve {
    DemandCurve::from_offers(
        population
            .iter()
            .filter(|d| d.state.enabled)
            .map(|d| (compute_price(&d.state, &d.params), d.params.p_rated))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clearing {
    pub price: f64,
    /// Set when no bid brings demand within feeder capacity.
    pub over_capacity: bool,
}

/// Base price when the feeder has room, otherwise the cheapest admissible bid.
pub fn clear_price(
    curve: &DemandCurve,
    p_base: f64,
    feeder_capacity: f64,
    bids: &[f64],
) -> Result<Clearing> {
    if curve.demand(p_base) <= feeder_capacity {
        return Ok(Clearing {
            price: p_base,
            over_capacity: false,
        });
    }
    let Some(&largest) = bids.last() else {
        return Err(Error::config(
            "market.price_bids",
            "no bids to clear an over-capacity feeder",
        ));
    };
    Ok(bids
        .iter()
        .find(|&&p| curve.demand(p) <= feeder_capacity)
        .map_or(
            Clearing {
                price: largest,
                over_capacity: true,
            },
            |&p| Clearing {
                price: p,
                over_capacity: false,
            },
        ))
}

/// One constant-price plan per bid over the prediction horizon.
pub fn enumerate_price_plans(bids: &[f64], horizon: usize) -> Vec<Vec<f64>> {
    bids.iter().map(|&p| vec![p; horizon]).collect()
}

/// Market parameters. Per-interval fields hold one value per interval, or a
/// single value applied to every interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarketConfig {
    /// Constant clearing price used by the fixed-price scenario, $/MWh.
    pub constant_price: f64,
    /// Base price forecast, $/MWh.
    pub p_base: Vec<f64>,
    /// Feeder capacity, kW.
    pub feeder_capacity: Vec<f64>,
    /// Candidate clearing prices, ascending, $/MWh.
    pub price_bids: Vec<f64>,
}

impl Default for MarketConfig {
    fn default() -> Self {
        Self {
            constant_price: 15.0,
            p_base: vec![15.0],
            feeder_capacity: vec![6000.0],
            price_bids: vec![15.0, 25.0, 35.0],
        }
    }
}

fn per_interval(values: &[f64], k: usize) -> f64 {
    if values.len() == 1 {
        values[0]
    } else {
        values[k]
    }
}

impl MarketConfig {
    pub fn p_base_at(&self, k: usize) -> f64 {
        per_interval(&self.p_base, k)
    }

    pub fn capacity_at(&self, k: usize) -> f64 {
        per_interval(&self.feeder_capacity, k)
    }

    pub fn validate(&self, n_k: usize) -> Result<()> {
        if self.price_bids.is_empty() {
            return Err(Error::config("market.price_bids", "must not be empty"));
        }
        if self.price_bids.iter().any(|p| !p.is_finite())
            || self.price_bids.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::config(
                "market.price_bids",
                "must be finite and strictly ascending",
            ));
        }
        for (name, series) in [
            ("market.p_base", &self.p_base),
            ("market.feeder_capacity", &self.feeder_capacity),
        ] {
            if series.len() != 1 && series.len() != n_k {
                return Err(Error::config(
                    name,
                    format!("expected 1 or {n_k} values, got {}", series.len()),
                ));
            }
            if series.iter().any(|v| !v.is_finite()) {
                return Err(Error::config(name, "values must be finite"));
            }
        }
        if self.feeder_capacity.iter().any(|&c| !(c > 0.0)) {
            return Err(Error::config("market.feeder_capacity", "must be positive"));
        }
        if !self.constant_price.is_finite() {
            return Err(Error::config("market.constant_price", "must be finite"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::der::{DerParams, DerState};

    fn priced(prices: &[f64]) -> Vec<Der> {
        prices
            .iter()
            .map(|&p| {
                let params = DerParams {
                    a: 0.9,
                    gamma: 1.0,
                    beta: 40.0,
                    p_max: 40.0,
                    soc_set: 0.7,
                    soc_max: 1.0,
                    p_rated: 6.0,
                };
                Der {
                    class: 0,
                    params,
                    state: DerState {
                        soc: (40.0 - p) / 40.0,
                        enabled: true,
                        on: false,
                    },
                }
            })
            .collect()
    }

    #[test]
    fn curve_steps() {
        let curve = build_demand_curve(&priced(&[10.0, 20.0, 30.0]));
        assert_eq!(curve.demand(5.0), 18.0);
        assert_eq!(curve.demand(10.0), 18.0);
        assert_eq!(curve.demand(15.0), 12.0);
        assert_eq!(curve.demand(25.0), 6.0);
        assert_eq!(curve.demand(35.0), 0.0);
    }

    #[test]
    fn empty_and_locked_out() {
        assert_eq!(build_demand_curve(&[]).demand(-100.0), 0.0);
        let mut pop = priced(&[10.0, 20.0]);
        for d in &mut pop {
            d.state.enabled = false;
        }
        assert_eq!(build_demand_curve(&pop).demand(-100.0), 0.0);
    }

    #[test]
    fn clearing_cases() {
        let curve = build_demand_curve(&priced(&[10.0, 20.0, 30.0]));
        let bids = [15.0, 25.0, 35.0];
        let c = clear_price(&curve, 15.0, 10.0, &bids).unwrap();
        assert_eq!(c.price, 25.0);
        assert!(!c.over_capacity);
        let c = clear_price(&curve, 15.0, 1000.0, &bids).unwrap();
        assert_eq!(c.price, 15.0);
        let c = clear_price(&curve, 0.0, 1.0, &[5.0, 12.0]).unwrap();
        assert_eq!((c.price, c.over_capacity), (12.0, true));
        assert!(clear_price(&curve, 0.0, 1.0, &[]).is_err());
        let empty = DemandCurve::default();
        assert_eq!(clear_price(&empty, 20.0, 1.0, &[]).unwrap().price, 20.0);
    }

    #[test]
    fn plans() {
        let plans = enumerate_price_plans(&[15.0, 25.0, 35.0], 6);
        assert_eq!(plans.len(), 3);
        assert!(plans.iter().all(|p| p.len() == 6));
        assert_eq!(enumerate_price_plans(&[15.0], 4).len(), 1);
        assert!(enumerate_price_plans(&[], 4).is_empty());
    }
}
