//! Energy buffer fed by on-site solar and wind harvesting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatteryParams {
    pub capacity_j: f64,
    /// Below this level the site is energy deficient.
    pub low_j: f64,
    /// Desired operating level.
    pub up_j: f64,
    pub leakage_j: f64,
    pub initial_j: f64,
    /// Solar harvest below this fraction of the trace peak counts as off-peak.
    pub offpeak_fraction: f64,
}

impl Default for BatteryParams {
    fn default() -> Self {
        BatteryParams {
            capacity_j: 490e3,
            low_j: 0.3 * 490e3,
            up_j: 0.7 * 490e3,
            leakage_j: 2e-6,
            initial_j: 0.7 * 490e3,
            offpeak_fraction: 0.05,
        }
    }
}

impl BatteryParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.low_j && self.low_j < self.up_j && self.up_j < self.capacity_j) {
            return Err(Error::config("battery", "thresholds must satisfy 0 < low_j < up_j < capacity_j"));
        }
        if !(0.0..=self.capacity_j).contains(&self.initial_j) {
            return Err(Error::config("battery.initial_j", "must lie in [0, capacity_j]"));
        }
        if !(self.leakage_j >= 0.0) {
            return Err(Error::config("battery.leakage_j", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.offpeak_fraction) {
            return Err(Error::config("battery.offpeak_fraction", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Solar,
    Wind,
    Both,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Solar => "solar",
            Source::Wind => "wind",
            Source::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarvestSlot {
    pub solar: f64,
    pub wind: f64,
    pub selected: f64,
    pub source: Source,
}

/// Picks the harvest feeding the buffer: solar at peak hours, wind off-peak,
/// both while the buffer is below its low threshold.
pub fn select_source(solar: f64, wind: f64, energy: f64, offpeak_threshold: f64, params: &BatteryParams) -> HarvestSlot {
    let solar = solar.max(0.0);
    let wind = wind.max(0.0);
    let source = if energy < params.low_j {
        Source::Both
    } else if solar >= offpeak_threshold && solar > 0.0 {
        Source::Solar
    } else {
        Source::Wind
    };
    let selected = match source {
        Source::Solar => solar,
        Source::Wind => wind,
        Source::Both => solar + wind,
    };
    HarvestSlot { solar, wind, selected, source }
}

/// Stored energy after one slot. The site may never draw more than it holds
/// at the start of the slot.
pub fn step(energy: f64, harvested: f64, site_energy: f64, params: &BatteryParams) -> Result<f64> {
    if site_energy > energy {
        return Err(Error::EnergyViolation { demand: site_energy, available: energy });
    }
    Ok(step_unchecked(energy, harvested, site_energy, params))
}

/// Same update without the availability check, for lookahead on forecasts.
pub fn step_unchecked(energy: f64, harvested: f64, site_energy: f64, params: &BatteryParams) -> f64 {
    (energy + harvested - site_energy - params.leakage_j).min(params.capacity_j).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Deficient,
    Nominal,
    Surplus,
}

pub fn classify(energy: f64, params: &BatteryParams) -> Level {
    if energy < params.low_j {
        Level::Deficient
    } else if energy >= params.up_j {
        Level::Surplus
    } else {
        Level::Nominal
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> BatteryParams {
        BatteryParams { leakage_j: 0.0, ..BatteryParams::default() }
    }

    #[test]
    fn source_selection() {
        let p = params();
        let h = select_source(200e3, 50e3, 300e3, 30e3, &p);
        assert_eq!((h.source, h.selected), (Source::Solar, 200e3));
        let h = select_source(0.0, 50e3, 300e3, 30e3, &p);
        assert_eq!((h.source, h.selected), (Source::Wind, 50e3));
        let h = select_source(200e3, 50e3, p.low_j - 1.0, 30e3, &p);
        assert_eq!((h.source, h.selected), (Source::Both, 250e3));
    }

    #[test]
    fn step_examples() {
        let p = params();
        assert!((step(100e3, 5e3, 3e3, &p).unwrap() - 102e3).abs() < 1e-9);
        assert_eq!(step(p.capacity_j, 10e3, 1e3, &p).unwrap(), p.capacity_j);
        let leaky = BatteryParams { leakage_j: 1.0, ..params() };
        assert_eq!(step(5e3, 0.0, 5e3, &leaky).unwrap(), 0.0);
        assert!(matches!(step(1e3, 0.0, 2e3, &p), Err(Error::EnergyViolation { .. })));
    }

    #[test]
    fn levels() {
        let p = params();
        assert_eq!(classify(p.low_j - 1.0, &p), Level::Deficient);
        assert_eq!(classify(p.up_j, &p), Level::Surplus);
        assert_eq!(classify(0.5 * (p.low_j + p.up_j), &p), Level::Nominal);
        assert!(BatteryParams::default().validate().is_ok());
    }
}
