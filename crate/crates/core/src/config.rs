//! JSON run configuration. Every field is optional; missing fields take the
//! defaults below.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::battery::BatteryParams;
use crate::controller::{ControlGrid, ControllerKind, CostWeights, F2Reference};
use crate::error::{Error, Result};
use crate::forecast::PredictorConfig;
use crate::site::{ComputeParams, RadioParams};
use crate::sim::{Scenario, Traces, DEFAULT_USER_COUNTS};
use crate::trace::{
    aggregate, load_trace, normalize, synth_trace, SeriesLabel, SynthProfile, TraceSeries, DEFAULT_SENSITIVE_FRACTION,
    SYNTH_SLOT_SECONDS,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    pub kind: ControllerKind,
    pub upsilon: f64,
    pub reservation_fraction: f64,
    pub horizon: usize,
    pub f2_reference: F2Reference,
    /// Control space; defaults to every knob value of the compute platform.
    pub grid: Option<ControlGrid>,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            kind: ControllerKind::DrcRs,
            upsilon: CostWeights::default().upsilon,
            reservation_fraction: 0.7,
            horizon: 3,
            f2_reference: F2Reference::Offered,
            grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TracePaths {
    pub traffic_a: Option<PathBuf>,
    pub traffic_b: Option<PathBuf>,
    pub solar: Option<PathBuf>,
    pub wind: Option<PathBuf>,
    /// Sampling interval of the files (s); they are summed into slots.
    pub native_resolution_s: f64,
}

impl TracePaths {
    fn any(&self) -> bool {
        self.traffic_a.is_some() || self.traffic_b.is_some() || self.solar.is_some() || self.wind.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_users: usize,
    pub n_slots: usize,
    pub warmup_slots: usize,
    pub seed: u64,
    pub per_user_demand_bits: f64,
    pub sensitive_fraction: f64,
    /// Use generated traces even when trace files are configured.
    pub synth: bool,
    pub traces: TracePaths,
    /// Harvest at the peak of the normalized solar trace (J per slot).
    pub solar_peak_j: f64,
    /// Harvest at a normalized wind value of 1 (J per slot).
    pub wind_scale_j: f64,
    pub user_counts: Vec<usize>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_users: 20,
            n_slots: 1488,
            warmup_slots: 336,
            seed: 7,
            per_user_demand_bits: 2e6,
            sensitive_fraction: DEFAULT_SENSITIVE_FRACTION,
            synth: false,
            traces: TracePaths { native_resolution_s: SYNTH_SLOT_SECONDS, ..TracePaths::default() },
            solar_peak_j: 600e3,
            wind_scale_j: 500e3,
            user_counts: DEFAULT_USER_COUNTS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastConfig {
    pub traffic: PredictorConfig,
    pub harvest: PredictorConfig,
    pub horizons: Vec<usize>,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        ForecastConfig {
            traffic: PredictorConfig::default(),
            harvest: PredictorConfig::default(),
            horizons: vec![1, 2, 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub radio: RadioParams,
    pub compute: ComputeParams,
    pub battery: BatteryParams,
    pub controller: ControllerConfig,
    pub scenario: ScenarioConfig,
    pub forecast: ForecastConfig,
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(s).map_err(|e| Error::config("<document>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        RunConfig::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Field-level checks. Static feasibility of the site is checked
    /// separately so it can be reported on its own.
    pub fn validate(&self) -> Result<()> {
        self.radio.validate()?;
        self.compute.validate()?;
        self.battery.validate()?;
        self.grid().validate(&self.compute)?;
        let c = &self.controller;
        if !(0.0..=1.0).contains(&c.upsilon) {
            return Err(Error::config("controller.upsilon", "must lie in [0, 1]"));
        }
        if !(c.reservation_fraction > 0.0 && c.reservation_fraction <= 1.0) {
            return Err(Error::config("controller.reservation_fraction", "must lie in (0, 1]"));
        }
        if c.horizon == 0 {
            return Err(Error::config("controller.horizon", "must be at least 1"));
        }
        let s = &self.scenario;
        if s.n_slots == 0 {
            return Err(Error::config("scenario.n_slots", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&s.sensitive_fraction) {
            return Err(Error::config("scenario.sensitive_fraction", "must lie in [0, 1]"));
        }
        if !(s.per_user_demand_bits >= 0.0) {
            return Err(Error::config("scenario.per_user_demand_bits", "must be non-negative"));
        }
        if !(s.solar_peak_j >= 0.0 && s.wind_scale_j >= 0.0) {
            return Err(Error::config("scenario.solar_peak_j", "harvest scales must be non-negative"));
        }
        if s.traces.any() && !(s.traces.native_resolution_s > 0.0) {
            return Err(Error::config("scenario.traces.native_resolution_s", "must be positive"));
        }
        for (name, p) in [("forecast.traffic", &self.forecast.traffic), ("forecast.harvest", &self.forecast.harvest)] {
            if p.season_length == 0 {
                return Err(Error::config(&format!("{name}.season_length"), "must be at least 1"));
            }
            if !(p.train_fraction > 0.0 && p.train_fraction < 1.0) {
                return Err(Error::config(&format!("{name}.train_fraction"), "must lie in (0, 1)"));
            }
        }
        if self.forecast.horizons.is_empty() || self.forecast.horizons.contains(&0) {
            return Err(Error::config("forecast.horizons", "needs at least one positive horizon"));
        }
        let warmup_needed = 2 * self.forecast.traffic.season_length.max(self.forecast.harvest.season_length);
        if s.warmup_slots < warmup_needed {
            return Err(Error::config(
                "scenario.warmup_slots",
                format!("must cover at least two seasons ({warmup_needed} slots)"),
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> ControlGrid {
        self.controller.grid.clone().unwrap_or_else(|| ControlGrid::full(&self.compute))
    }

    /// Trace shapes covering warm-up plus simulated slots: traffic
    /// normalized to [0, 1], harvest scaled to joules per slot.
    pub fn traces(&self) -> Result<Traces> {
        let s = &self.scenario;
        let n = s.warmup_slots + s.n_slots;
        let slot = self.compute.slot_s;
        let source = |label: SeriesLabel, path: &Option<PathBuf>, profile: SynthProfile, offset: u64| -> Result<TraceSeries> {
            match path {
                Some(p) if !s.synth => {
                    let raw = load_trace(p, label, s.traces.native_resolution_s)?;
                    Ok(normalize(&aggregate(&raw, slot)?))
                }
                _ => Ok(synth_trace(profile, n, s.seed.wrapping_add(offset)).with_label(label)),
            }
        };
        let t = &s.traces;
        let solar = source(SeriesLabel::Solar, &t.solar, SynthProfile::Solar, 2)?;
        let wind = source(SeriesLabel::Wind, &t.wind, SynthProfile::Wind, 3)?;
        let solar_max = solar.max();
        let solar_scale = if solar_max > 0.0 { s.solar_peak_j / solar_max } else { 0.0 };
        Ok(Traces {
            traffic_a: source(SeriesLabel::TrafficA, &t.traffic_a, SynthProfile::DiurnalTraffic, 0)?,
            traffic_b: source(SeriesLabel::TrafficB, &t.traffic_b, SynthProfile::DiurnalTraffic, 1)?,
            solar: solar.scaled(solar_scale),
            wind: wind.scaled(s.wind_scale_j),
        })
    }

    pub fn scenario(&self) -> Result<Scenario> {
        self.validate()?;
        let c = &self.controller;
        let s = &self.scenario;
        let scenario = Scenario {
            radio: self.radio.clone(),
            compute: self.compute.clone(),
            battery: self.battery.clone(),
            controller: c.kind,
            weights: CostWeights { upsilon: c.upsilon },
            f2_reference: c.f2_reference,
            reservation_fraction: c.reservation_fraction,
            horizon: c.horizon,
            grid: self.grid(),
            n_users: s.n_users,
            n_slots: s.n_slots,
            warmup_slots: s.warmup_slots,
            per_user_demand_bits: s.per_user_demand_bits,
            sensitive_fraction: s.sensitive_fraction,
            traffic_predictor: self.forecast.traffic.clone(),
            harvest_predictor: self.forecast.harvest.clone(),
            traces: self.traces()?,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}
