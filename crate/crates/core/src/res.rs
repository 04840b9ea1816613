//! Renewable power from irradiance and wind-speed series.
//!
//! Two families of maps live here: the operating envelopes (cut-in, rated,
//! and a mid-range law) used by the scheduler, and the single-diode PV cell
//! model used to study how irradiance loss degrades the P-V curve.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Betz limit on the power coefficient.
pub const BETZ_LIMIT: f64 = 0.593;

const BOLTZMANN: f64 = 1.380_649e-23;
const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
const KELVIN_OFFSET: f64 = 273.15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WtModel {
    /// Cut-in wind speed, m/s.
    pub v_min: f64,
    /// Speed at and above which rated power is delivered, m/s.
    pub v_max: f64,
    /// Rated power, kW.
    pub p_max: f64,
    /// Air density, kg/m³.
    pub rho: f64,
    /// Swept area, m².
    pub area: f64,
    pub cp: f64,
}

impl Default for WtModel {
    fn default() -> Self {
        Self {
            v_min: 3.5,
            v_max: 25.0,
            p_max: 2000.0,
            rho: 1.23,
            area: 8495.0,
            cp: 0.4,
        }
    }
}

impl WtModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.v_min && self.v_min < self.v_max) {
            return Err(Error::config("wind.v_min", "need 0 < v_min < v_max"));
        }
        if !(0.0 < self.cp && self.cp <= BETZ_LIMIT) {
            return Err(Error::config("wind.cp", "must lie in (0, 0.593]"));
        }
        if !(self.rho > 0.0 && self.area > 0.0 && self.p_max > 0.0) {
            return Err(Error::config(
                "wind",
                "rho, area and p_max must be positive",
            ));
        }
        Ok(())
    }

    /// Uncapped aerodynamic power `0.5 rho A v^3 cp`, kW.
    pub fn aerodynamic_power(&self, v: f64) -> f64 {
        0.5 * self.rho * self.area * v.powi(3) * self.cp / 1000.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PvModel {
    /// Irradiance below which the array produces nothing, W/m².
    pub irr_min: f64,
    /// Irradiance at which rated power is reached, W/m².
    pub irr_max: f64,
    /// Rated power of the array, kW.
    pub p_max: f64,
    /// Short-circuit current at standard conditions, A.
    pub i_scs: f64,
    /// Standard irradiance, W/m².
    pub g_as: f64,
    /// Temperature coefficient of the short-circuit current, 1/K.
    pub delta_isc: f64,
    /// Standard temperature, °C.
    pub t_s: f64,
    /// Series resistance, Ω.
    pub r_s: f64,
    /// Shunt resistance, Ω.
    pub r_sh: f64,
    pub ideality: f64,
    pub cells_in_series: u32,
    /// Open-circuit voltage per cell used to derive the saturation current
    /// when `saturation_current` is not given, V.
    pub cell_voc: f64,
    pub saturation_current: Option<f64>,
}

impl Default for PvModel {
    fn default() -> Self {
        Self {
            irr_min: 100.0,
            irr_max: 1050.0,
            p_max: 3000.0,
            i_scs: 7.84,
            g_as: 1000.0,
            delta_isc: 0.102,
            t_s: 25.0,
            r_s: 0.393,
            r_sh: 100.0,
            ideality: 1.3,
            cells_in_series: 60,
            cell_voc: 0.6,
            saturation_current: None,
        }
    }
}

/// Behaviour of the power maps between cut-in and rated input.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MidRange {
    /// Cubic wind law and linear irradiance ramp.
    #[default]
    Physics,
    /// Hold the previous interval's power.
    Hold,
}

/// How PV power is derived from irradiance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolarPath {
    /// Linear ramp between `irr_min` and `irr_max`.
    #[default]
    Ramp,
    /// Scale rated power by the single-diode maximum-power point.
    Diode,
}

impl PvModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.irr_min && self.irr_min < self.irr_max) {
            return Err(Error::config("pv.irr_min", "need 0 <= irr_min < irr_max"));
        }
        if !(self.i_scs > 0.0 && self.g_as > 0.0) {
            return Err(Error::config("pv.i_scs", "i_scs and g_as must be positive"));
        }
        if !(self.r_s >= 0.0 && self.r_sh > 0.0) {
            return Err(Error::config("pv.r_s", "need r_s >= 0 and r_sh > 0"));
        }
        if !(self.p_max > 0.0 && self.ideality > 0.0 && self.cells_in_series > 0) {
            return Err(Error::config(
                "pv.p_max",
                "p_max, ideality and cells_in_series must be positive",
            ));
        }
        if let Some(i0) = self.saturation_current {
            if !(i0 > 0.0) {
                return Err(Error::config("pv.saturation_current", "must be positive"));
            }
        }
        Ok(())
    }

    /// Modified thermal voltage of the whole string, `N_s n k T / q`.
    fn thermal_voltage(&self, t: f64) -> f64 {
        self.cells_in_series as f64 * self.ideality * BOLTZMANN * (t + KELVIN_OFFSET)
            / ELEMENTARY_CHARGE
    }

    /// Diode saturation current at standard conditions.
    pub fn saturation(&self) -> f64 {
        self.saturation_current.unwrap_or_else(|| {
            let voc = self.cell_voc * self.cells_in_series as f64;
            self.i_scs / ((voc / self.thermal_voltage(self.t_s)).exp() - 1.0)
        })
    }
}

fn check_non_negative(x: f64, what: &str) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Input(format!(
            "{what} must be non-negative, got {x}"
        )));
    }
    Ok(())
}

/// Power of one turbine at wind speed `v`, kW. `held` is the previous
/// interval's output, used only by [`MidRange::Hold`].
pub fn wind_power(v: f64, model: &WtModel, mode: MidRange, held: f64) -> Result<f64> {
    check_non_negative(v, "wind speed")?;
    Ok(if v < model.v_min {
        0.0
    } else if v >= model.v_max {
        model.p_max
    } else {
        match mode {
            MidRange::Physics => model.aerodynamic_power(v).min(model.p_max),
            MidRange::Hold => held.clamp(0.0, model.p_max),
        }
    })
}

/// Power of the PV array at irradiance `irr`, kW.
pub fn solar_power(irr: f64, model: &PvModel, mode: MidRange, held: f64) -> Result<f64> {
    check_non_negative(irr, "irradiance")?;
    Ok(if irr < model.irr_min {
        0.0
    } else if irr >= model.irr_max {
        model.p_max
    } else {
        match mode {
            MidRange::Physics => {
                model.p_max * (irr - model.irr_min) / (model.irr_max - model.irr_min)
            }
            MidRange::Hold => held.clamp(0.0, model.p_max),
        }
    })
}

/// Photo-generated current at irradiance `g_a` and temperature `t`, A.
pub fn photo_current(g_a: f64, t: f64, model: &PvModel) -> f64 {
    model.i_scs * (g_a / model.g_as) * (1.0 + model.delta_isc * (t - model.t_s))
}

/// Sampled P-V characteristic.
#[derive(Debug, Clone, PartialEq)]
pub struct PvCurve {
    /// `(V, P)` pairs, V ascending from 0 to the open-circuit voltage.
    pub points: Vec<(f64, f64)>,
    pub v_oc: f64,
    /// `(V, P)` of the maximum-power point.
    pub mpp: (f64, f64),
}

/// Bisection on a function that is non-increasing over `[lo, hi]` with
/// `f(lo) >= 0 >= f(hi)`.
fn bisect_decreasing(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64, what: &str) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo >= 0.0 && fhi <= 0.0) {
        return Err(Error::Numerical(format!(
            "{what}: root not bracketed on [{lo}, {hi}] (f = {flo}, {fhi})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

struct Diode {
    i_ph: f64,
    i_0: f64,
    v_t: f64,
    r_s: f64,
    r_sh: f64,
}

impl Diode {
    fn new(model: &PvModel, g_a: f64, t: f64) -> Self {
        Self {
            i_ph: photo_current(g_a, t, model),
            i_0: model.saturation(),
            v_t: model.thermal_voltage(t),
            r_s: model.r_s,
            r_sh: model.r_sh,
        }
    }

    /// Residual of the implicit current equation at terminal voltage `v`.
    fn residual(&self, v: f64, i: f64) -> f64 {
        let vd = v + i * self.r_s;
        self.i_ph - self.i_0 * ((vd / self.v_t).exp() - 1.0) - vd / self.r_sh - i
    }

    fn current(&self, v: f64) -> Result<f64> {
        if self.r_s == 0.0 {
            return Ok(self.residual(v, 0.0));
        }
        // At i = -v / r_s the diode and shunt branches vanish, so the residual
        // is i_ph + v / r_s >= 0; at i = i_ph it is non-positive for v >= 0.
        let lo = -v / self.r_s;
        let hi = self.i_ph.max(lo);
        bisect_decreasing(lo, hi, |i| self.residual(v, i), "diode current")
    }

    fn open_circuit_voltage(&self) -> Result<f64> {
        if self.i_ph <= 0.0 {
            return Ok(0.0);
        }
        let hi = self.v_t * (self.i_ph / self.i_0 + 1.0).ln();
        bisect_decreasing(0.0, hi, |v| self.residual(v, 0.0), "open-circuit voltage")
    }
}

/// Sweep the P-V curve from short circuit to open circuit.
pub fn pv_curve(model: &PvModel, g_a: f64, t: f64, n_points: usize) -> Result<PvCurve> {
    check_non_negative(g_a, "irradiance")?;
    if n_points < 2 {
        return Err(Error::Input("pv_curve needs at least 2 points".into()));
    }
    let diode = Diode::new(model, g_a, t);
    let v_oc = diode.open_circuit_voltage()?;
    let power = |v: f64| -> Result<f64> { Ok(v * diode.current(v)?) };

    let mut points = Vec::with_capacity(n_points);
    for j in 0..n_points {
        let v = v_oc * j as f64 / (n_points - 1) as f64;
        let p = if j == 0 || j == n_points - 1 {
            0.0
        } else {
            power(v)?
        };
        points.push((v, p));
    }

    let best = points
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(j, _)| j)
        .unwrap_or(0);
    let mut mpp = points[best];
    if v_oc > 0.0 {
        // golden-section refinement inside the neighbouring samples
        let step = v_oc / (n_points - 1) as f64;
        let (mut a, mut b) = ((mpp.0 - step).max(0.0), (mpp.0 + step).min(v_oc));
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..80 {
            let c = b - ratio * (b - a);
            let d = a + ratio * (b - a);
            if power(c)? > power(d)? {
                b = d;
            } else {
                a = c;
            }
        }
        let v = 0.5 * (a + b);
        let p = power(v)?;
        if p > mpp.1 {
            mpp = (v, p);
        }
    }
    Ok(PvCurve { points, v_oc, mpp })
}

/// Meteorological inputs for a scheduling day.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResForecast {
    /// W/m² per interval.
    pub irradiance: Vec<f64>,
    /// m/s per interval.
    pub wind_speed: Vec<f64>,
    /// Lower-deviation bound on irradiance, W/m².
    pub irr_uncertainty: Option<Vec<f64>>,
    /// Lower-deviation bound on wind speed, m/s.
    pub wind_uncertainty: Option<Vec<f64>>,
    /// Cell temperature, °C; standard temperature when absent.
    pub temperature: Option<Vec<f64>>,
}

impl ResForecast {
    pub fn len(&self) -> usize {
        self.irradiance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.irradiance.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.irradiance.len();
        let named = [
            ("wind_speed", Some(&self.wind_speed)),
            ("irr_uncertainty", self.irr_uncertainty.as_ref()),
            ("wind_uncertainty", self.wind_uncertainty.as_ref()),
            ("temperature", self.temperature.as_ref()),
        ];
        for (name, series) in named {
            if let Some(s) = series {
                if s.len() != n {
                    return Err(Error::Input(format!(
                        "{name} has {} values, irradiance has {n}",
                        s.len()
                    )));
                }
            }
        }
        for (name, series) in [
            ("irradiance", Some(&self.irradiance)),
            ("wind_speed", Some(&self.wind_speed)),
            ("irr_uncertainty", self.irr_uncertainty.as_ref()),
            ("wind_uncertainty", self.wind_uncertainty.as_ref()),
        ] {
            if let Some(s) = series {
                if let Some((k, v)) = s.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
                    return Err(Error::Input(format!(
                        "{name}[{k}] = {v} is negative or NaN"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Device set and evaluation options for [`res_series`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResFleet {
    pub wind: Vec<WtModel>,
    pub pv: PvModel,
    pub mid_range: MidRange,
    pub solar_path: SolarPath,
}

impl Default for ResFleet {
    fn default() -> Self {
        Self {
            wind: vec![WtModel::default(); 2],
            pv: PvModel::default(),
            mid_range: MidRange::Physics,
            solar_path: SolarPath::Ramp,
        }
    }
}

impl ResFleet {
    /// Small-fleet ratings: 3 kW turbines and a 0.1 kW PV array.
    pub fn small_ratings() -> Self {
        let mut fleet = Self::default();
        for wt in &mut fleet.wind {
            wt.p_max = 3.0;
        }
        fleet.pv.p_max = 0.1;
        fleet
    }

    pub fn validate(&self) -> Result<()> {
        for wt in &self.wind {
            wt.validate()?;
        }
        self.pv.validate()
    }

    fn diode_power(&self, irr: f64, t: f64, reference: f64) -> Result<f64> {
        if irr < self.pv.irr_min {
            return Ok(0.0);
        }
        let mpp = pv_curve(&self.pv, irr, t, 64)?.mpp.1;
        Ok((self.pv.p_max * mpp / reference).min(self.pv.p_max))
    }
}

/// Available renewable power per interval, kW.
pub fn res_series(forecast: &ResForecast, fleet: &ResFleet, worst_case: bool) -> Result<Vec<f64>> {
    forecast.validate()?;
    let n = forecast.len();
    let zeros = vec![0.0; n];
    let (irr_dev, wind_dev) = if worst_case {
        (
            forecast.irr_uncertainty.as_ref().unwrap_or(&zeros),
            forecast.wind_uncertainty.as_ref().unwrap_or(&zeros),
        )
    } else {
        (&zeros, &zeros)
    };
    let reference = match fleet.solar_path {
        SolarPath::Diode => {
            pv_curve(&fleet.pv, fleet.pv.irr_max, fleet.pv.t_s, 64)?
                .mpp
                .1
        }
        SolarPath::Ramp => 1.0,
    };

    let mut held_wind = vec![0.0; fleet.wind.len()];
    let mut held_solar = 0.0;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let irr = (forecast.irradiance[k] - irr_dev[k]).max(0.0);
        let v = (forecast.wind_speed[k] - wind_dev[k]).max(0.0);
        let t = forecast
            .temperature
            .as_ref()
            .map_or(fleet.pv.t_s, |ts| ts[k]);
        let mut total = 0.0;
        for (wt, held) in fleet.wind.iter().zip(held_wind.iter_mut()) {
            *held = wind_power(v, wt, fleet.mid_range, *held)?;
            total += *held;
        }
        held_solar = match (fleet.solar_path, fleet.mid_range) {
            (SolarPath::Diode, MidRange::Physics) => fleet.diode_power(irr, t, reference)?,
            _ => solar_power(irr, &fleet.pv, fleet.mid_range, held_solar)?,
        };
        total += held_solar;
        out.push(total);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wind_envelope_edges() {
        let wt = WtModel::default();
        assert_eq!(wind_power(2.0, &wt, MidRange::Physics, 0.0).unwrap(), 0.0);
        assert_eq!(
            wind_power(30.0, &wt, MidRange::Physics, 0.0).unwrap(),
            wt.p_max
        );
        assert_eq!(
            wind_power(25.0, &wt, MidRange::Physics, 0.0).unwrap(),
            wt.p_max
        );
        assert!(wind_power(-1.0, &wt, MidRange::Physics, 0.0).is_err());
        assert_eq!(wind_power(8.0, &wt, MidRange::Hold, 123.0).unwrap(), 123.0);
    }

    #[test]
    fn aerodynamic_power_at_ten_metres_per_second() {
        // 0.5 * 1.23 * 8495 * 1000 * 0.4 W
        let raw = WtModel::default().aerodynamic_power(10.0);
        assert!((raw - 2089.77).abs() < 1e-9);
    }

    #[test]
    fn solar_ramp_cases() {
        let pv = PvModel::default();
        assert_eq!(solar_power(50.0, &pv, MidRange::Physics, 0.0).unwrap(), 0.0);
        assert_eq!(
            solar_power(1100.0, &pv, MidRange::Physics, 0.0).unwrap(),
            pv.p_max
        );
        assert_eq!(
            solar_power(575.0, &pv, MidRange::Physics, 0.0).unwrap(),
            0.5 * pv.p_max
        );
        assert!(solar_power(-0.1, &pv, MidRange::Physics, 0.0).is_err());
    }

    #[test]
    fn photo_current_cases() {
        let pv = PvModel::default();
        assert_eq!(photo_current(1000.0, pv.t_s, &pv), 7.84);
        assert_eq!(photo_current(0.0, pv.t_s, &pv), 0.0);
        assert_eq!(photo_current(500.0, pv.t_s, &pv), 3.92);
    }

    #[test]
    fn betz_limit_rejected() {
        let wt = WtModel {
            cp: 0.6,
            ..WtModel::default()
        };
        assert!(wt.validate().is_err());
    }

    #[test]
    fn saturation_current_gives_cell_voc() {
        let pv = PvModel::default();
        let curve = pv_curve(&pv, pv.g_as, pv.t_s, 50).unwrap();
        // shunt leakage pulls V_oc slightly below 0.6 V per cell
        let per_cell = curve.v_oc / pv.cells_in_series as f64;
        assert!((per_cell - 0.6).abs() < 0.005, "{per_cell}");
    }

    #[test]
    fn dark_curve_is_flat() {
        let pv = PvModel::default();
        let curve = pv_curve(&pv, 0.0, pv.t_s, 10).unwrap();
        assert!(curve.points.iter().all(|&(_, p)| p == 0.0));
        assert_eq!(curve.mpp.1, 0.0);
    }

    #[test]
    fn mpp_is_interior() {
        let pv = PvModel::default();
        let curve = pv_curve(&pv, 1000.0, pv.t_s, 100).unwrap();
        let (v, p) = curve.mpp;
        assert!(v > 0.0 && v < curve.v_oc);
        assert!(p > curve.points[0].1 && p > curve.points.last().unwrap().1);
    }

    #[test]
    fn mpp_grows_with_irradiance() {
        let pv = PvModel::default();
        let half = pv_curve(&pv, 500.0, pv.t_s, 200).unwrap().mpp.1;
        let full = pv_curve(&pv, 1000.0, pv.t_s, 200).unwrap().mpp.1;
        assert!(half < full);
    }

    #[test]
    fn mpp_mesh_refinement() {
        let pv = PvModel::default();
        for g in [200.0, 600.0, 1000.0] {
            let coarse = pv_curve(&pv, g, pv.t_s, 25).unwrap().mpp.1;
            let fine = pv_curve(&pv, g, pv.t_s, 50).unwrap().mpp.1;
            assert!((coarse - fine).abs() <= 0.01 * fine);
        }
    }

    #[test]
    fn too_few_points() {
        assert!(pv_curve(&PvModel::default(), 100.0, 25.0, 1).is_err());
    }

    #[test]
    fn series_length_mismatch() {
        let f = ResForecast {
            irradiance: vec![0.0; 3],
            wind_speed: vec![0.0; 2],
            ..Default::default()
        };
        assert!(res_series(&f, &ResFleet::default(), false).is_err());
    }

    #[test]
    fn zero_bounds_match_deterministic() {
        let f = ResForecast {
            irradiance: vec![0.0, 300.0, 800.0, 1200.0],
            wind_speed: vec![2.0, 6.0, 9.0, 30.0],
            irr_uncertainty: Some(vec![0.0; 4]),
            wind_uncertainty: Some(vec![0.0; 4]),
            temperature: None,
        };
        let fleet = ResFleet::default();
        assert_eq!(
            res_series(&f, &fleet, true).unwrap(),
            res_series(&f, &fleet, false).unwrap()
        );
    }

    #[test]
    fn diode_path_stays_within_rating() {
        let f = ResForecast {
            irradiance: vec![0.0, 150.0, 600.0, 1050.0, 1300.0],
            wind_speed: vec![0.0; 5],
            ..Default::default()
        };
        let fleet = ResFleet {
            solar_path: SolarPath::Diode,
            ..ResFleet::default()
        };
        let p = res_series(&f, &fleet, false).unwrap();
        assert_eq!(p[0], 0.0);
        assert!(p.windows(2).all(|w| w[0] <= w[1] + 1e-9));
        assert!(p.iter().all(|&x| x <= fleet.pv.p_max + 1e-9));
        assert!((p[3] - fleet.pv.p_max).abs() < 1e-6);
    }
}
