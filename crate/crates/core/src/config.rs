//! Run configuration: TOML schema, validation and preset.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::der::PopulationSpec;
use crate::error::{Error, Result};
use crate::market::MarketConfig;
use crate::milp::{SolveOptions, Tolerances};
use crate::res::{res_series, ResFleet, ResForecast};
use crate::scheduler::{Forecasts, HorizonConfig, Prepared, Scenario, UnitClass};
use crate::series::{load_series, synthetic_profile, APPROX_IRRADIANCE, APPROX_WIND_SPEED};

/// Relative forecast deviation that brings worst-case RES on the default
/// day to about 69% of the deterministic total.
pub const CALIBRATED_RELATIVE_UNCERTAINTY: f64 = 0.1441;

/// Inline values or a path to an `index,value` CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeriesSource {
    Values(Vec<f64>),
    File(PathBuf),
}

impl SeriesSource {
    fn resolve(&self) -> Result<Vec<f64>> {
        match self {
            SeriesSource::Values(v) => Ok(v.clone()),
            SeriesSource::File(p) => load_series(p),
        }
    }

    fn rebase(&mut self, base: &Path) {
        if let SeriesSource::File(p) = self {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

/// Built-in meteorological day used when no series is given.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Hand-digitized 24-interval approximation of the reference day.
    #[default]
    Approximate,
    /// Smooth generated day of any length.
    Synthetic,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForecastConfig {
    pub profile: Profile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub irradiance: Option<SeriesSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wind_speed: Option<SeriesSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<SeriesSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub irradiance_uncertainty: Option<SeriesSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wind_uncertainty: Option<SeriesSource>,
    /// Uncertainty as a fraction of the forecast, used for any bound not
    /// given explicitly.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_uncertainty: Option<f64>,
}

impl ForecastConfig {
    pub fn has_uncertainty(&self) -> bool {
        self.relative_uncertainty.is_some()
            || (self.irradiance_uncertainty.is_some() && self.wind_uncertainty.is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub feasibility: f64,
    pub integrality: f64,
    pub relative_gap: f64,
    pub node_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolveOptions::default();
        Self {
            feasibility: d.tolerances.feasibility,
            integrality: d.tolerances.integrality,
            relative_gap: d.tolerances.relative_gap,
            node_limit: d.node_limit,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            tolerances: Tolerances {
                feasibility: self.feasibility,
                integrality: self.integrality,
                relative_gap: self.relative_gap,
            },
            node_limit: self.node_limit,
            record_nodes: false,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v, max) in [
            ("feasibility", self.feasibility, 1e-2),
            ("integrality", self.integrality, 0.5),
            ("relative_gap", self.relative_gap, 1.0),
        ] {
            if !(v.is_finite() && v >= 0.0 && v < max) {
                return Err(Error::config(
                    format!("solver.{name}"),
                    format!("must lie in [0, {max})"),
                ));
            }
        }
        if self.node_limit < 1 {
            return Err(Error::config("solver.node_limit", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub horizon: HorizonConfig,
    pub population: PopulationSpec,
    pub units: Vec<UnitClass>,
    pub market: MarketConfig,
    pub res: ResFleet,
    pub forecast: ForecastConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub solver: SolverConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::ConstantPrice,
            horizon: HorizonConfig::default(),
            population: PopulationSpec::default(),
            units: vec![UnitClass::default_dg(), UnitClass::default_bess()],
            market: MarketConfig::default(),
            res: ResFleet::default(),
            forecast: ForecastConfig::default(),
            output_dir: None,
            solver: SolverConfig::default(),
        }
    }
}

impl RunConfig {
    /// Defaults plus calibrated forecast uncertainty, so every scenario runs.
    pub fn preset() -> Self {
        let mut cfg = Self::default();
        cfg.forecast.relative_uncertainty = Some(CALIBRATED_RELATIVE_UNCERTAINTY);
        cfg
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: PathBuf::from("<config>"),
            message: e.to_string(),
        })?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Input(format!("cannot serialize config: {e}")))
    }

    /// Resolved meteorological inputs for the run.
    pub fn forecast_inputs(&self) -> Result<ResForecast> {
        let n = self.horizon.n_k;
        let f = &self.forecast;
        let named = |name: &str, src: &Option<SeriesSource>| -> Result<Option<Vec<f64>>> {
            let Some(src) = src else { return Ok(None) };
            let values = src.resolve()?;
            if values.len() != n {
                return Err(Error::config(
                    format!("forecast.{name}"),
                    format!("has {} values, horizon.n_k is {n}", values.len()),
                ));
            }
            Ok(Some(values))
        };
        let irradiance = named("irradiance", &f.irradiance)?;
        let wind_speed = named("wind_speed", &f.wind_speed)?;
        let (irradiance, wind_speed) = match (irradiance, wind_speed) {
            (Some(i), Some(w)) => (i, w),
            (i, w) => {
                let (pi, pw) = match f.profile {
                    Profile::Approximate => {
                        if n != APPROX_IRRADIANCE.len() {
                            return Err(Error::config(
                                "forecast.profile",
                                format!(
                                    "the approximate profile has {} intervals, horizon.n_k is {n}; \
                                     use the synthetic profile or give series",
                                    APPROX_IRRADIANCE.len()
                                ),
                            ));
                        }
                        (APPROX_IRRADIANCE.to_vec(), APPROX_WIND_SPEED.to_vec())
                    }
                    Profile::Synthetic => synthetic_profile(n, 800.0, 6.0, 2.0),
                };
                (i.unwrap_or(pi), w.unwrap_or(pw))
            }
        };
        let relative = |base: &[f64]| -> Option<Vec<f64>> {
            f.relative_uncertainty
                .map(|r| base.iter().map(|x| x * r).collect())
        };
        let irr_uncertainty = named("irradiance_uncertainty", &f.irradiance_uncertainty)?
            .or_else(|| relative(&irradiance));
        let wind_uncertainty =
            named("wind_uncertainty", &f.wind_uncertainty)?.or_else(|| relative(&wind_speed));
        let forecast = ResForecast {
            irradiance,
            wind_speed,
            irr_uncertainty,
            wind_uncertainty,
            temperature: named("temperature", &f.temperature)?,
        };
        forecast.validate()?;
        Ok(forecast)
    }

    fn validate_static(&self) -> Result<()> {
        self.horizon.validate()?;
        self.population.validate()?;
        if self.units.is_empty() {
            return Err(Error::config("units", "at least one unit class"));
        }
        for (i, u) in self.units.iter().enumerate() {
            u.validate(&format!("units[{i}]"))?;
            if self.units[..i].iter().any(|o| o.name == u.name) {
                return Err(Error::config(
                    format!("units[{i}].name"),
                    format!("`{}` is used twice", u.name),
                ));
            }
            if u.name.is_empty() || u.name.contains([',', '"', '\n', '/']) {
                return Err(Error::config(
                    format!("units[{i}].name"),
                    "must be non-empty without commas, quotes, slashes or newlines",
                ));
            }
        }
        crate::scheduler::common_quantum(
            self.units.iter().flat_map(|u| u.bid_ladder.iter().copied()),
        )?;
        self.market.validate(self.horizon.n_k)?;
        if !self.market.constant_price.is_finite() {
            return Err(Error::config("market.constant_price", "must be finite"));
        }
        self.res.validate()?;
        if let Some(r) = self.forecast.relative_uncertainty {
            if !(r.is_finite() && (0.0..=1.0).contains(&r)) {
                return Err(Error::config(
                    "forecast.relative_uncertainty",
                    "must lie in [0, 1]",
                ));
            }
        }
        if self.scenario == Scenario::Robust && !self.forecast.has_uncertainty() {
            return Err(Error::config(
                "forecast",
                "scenario 3 needs irradiance_uncertainty and wind_uncertainty, \
                 or relative_uncertainty",
            ));
        }
        self.solver.validate()
    }

    /// Check the configuration, including that every series loads.
    pub fn validate(&self) -> Result<()> {
        self.validate_static()?;
        self.forecast_inputs().map(|_| ())
    }

    pub fn prepare(&self) -> Result<Prepared> {
        self.validate_static()?;
        let forecast = self.forecast_inputs()?;
        let deterministic = res_series(&forecast, &self.res, false)?;
        let worst_case =
            if forecast.irr_uncertainty.is_some() || forecast.wind_uncertainty.is_some() {
                res_series(&forecast, &self.res, true)?
            } else {
                deterministic.clone()
            };
        Ok(Prepared {
            scenario: self.scenario,
            population: self.population.build()?,
            der_classes: self.population.classes.iter().map(|c| c.a).collect(),
            classes: self.units.clone(),
            market: self.market.clone(),
            horizon: self.horizon.clone(),
            forecasts: Forecasts {
                deterministic,
                worst_case,
            },
            solve: self.solver.options(),
        })
    }
}

/// Parse and validate a config file; relative series paths are taken
/// relative to the file's directory.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let f = &mut cfg.forecast;
    for src in [
        &mut f.irradiance,
        &mut f.wind_speed,
        &mut f.temperature,
        &mut f.irradiance_uncertainty,
        &mut f.wind_uncertainty,
    ]
    .into_iter()
    .flatten()
    {
        src.rebase(base);
    }
    cfg.validate()?;
    Ok(cfg)
}
