use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Converts a spectral density in dBm/Hz to W/Hz.
pub fn dbm_per_hz_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioParams {
    pub bandwidth_hz: f64,
    pub noise_density_w_per_hz: f64,
    /// Average distance between neighbouring base stations.
    pub inter_site_distance_m: f64,
    pub path_loss_exponent: f64,
    pub path_loss_constant: f64,
    pub target_rate_bps: f64,
    pub bs_operating_power_w: f64,
    pub backhaul_power_w: f64,
    /// Cost of moving data between the base station and the edge server.
    pub data_exchange_j_per_byte: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        RadioParams {
            bandwidth_hz: 1e6,
            noise_density_w_per_hz: dbm_per_hz_to_watts(-174.0),
            inter_site_distance_m: 2500.0,
            path_loss_exponent: 4.0,
            path_loss_constant: 1e-4,
            target_rate_bps: 1e6,
            bs_operating_power_w: 10.6,
            backhaul_power_w: 50.0,
            data_exchange_j_per_byte: 1e-3,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::config("radio.bandwidth_hz", "must be positive"));
        }
        if !(self.target_rate_bps > 0.0) {
            return Err(Error::config("radio.target_rate_bps", "must be positive"));
        }
        if !(self.path_loss_exponent >= 2.0) {
            return Err(Error::config("radio.path_loss_exponent", "must be at least 2"));
        }
        if !(self.path_loss_constant > 0.0) {
            return Err(Error::config("radio.path_loss_constant", "must be positive"));
        }
        for (name, v) in [
            ("radio.noise_density_w_per_hz", self.noise_density_w_per_hz),
            ("radio.inter_site_distance_m", self.inter_site_distance_m),
            ("radio.bs_operating_power_w", self.bs_operating_power_w),
            ("radio.backhaul_power_w", self.backhaul_power_w),
            ("radio.data_exchange_j_per_byte", self.data_exchange_j_per_byte),
        ] {
            if !(v >= 0.0) {
                return Err(Error::config(name, "must be non-negative"));
            }
        }
        Ok(())
    }
}

/// How the network-adapter offload energy is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NicFormula {
    /// Idle energy when the offload engine is off, maximum when it is on.
    #[default]
    Corrected,
    /// `delta * idle + max`, as originally printed.
    Verbatim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComputeParams {
    pub max_containers: usize,
    pub min_containers: usize,
    /// Allowed per-container processing rates in Mbit/s, ascending, first is 0.
    pub rate_levels_mbps: Vec<f64>,
    pub container_idle_j: f64,
    pub container_max_j: f64,
    /// Per-container reconfiguration cost per squared unit of rate change.
    pub switching_cost_j: f64,
    /// Maximum per-slot, per-container processing time.
    pub max_processing_time_s: f64,
    pub max_container_load_bits: u64,
    pub nic_idle_j: f64,
    pub nic_max_j: f64,
    pub nic_formula: NicFormula,
    pub link_power_w: f64,
    pub link_rtt_s: f64,
    pub min_link_rate_bps: f64,
    pub max_link_rate_bps: f64,
    pub max_drivers: usize,
    pub driver_energy_j_per_s: f64,
    /// Bits one optical driver can move out of the output buffer per slot.
    pub driver_capacity_bits: u64,
    pub input_buffer_bits: u64,
    pub output_buffer_bits: u64,
    pub cache_response_factor: f64,
    pub cache_transmission_j: f64,
    pub cache_storage_j: f64,
    pub slot_s: f64,
    /// Hard per-slot deadline; defaults to the slot length.
    pub deadline_s: f64,
}

impl Default for ComputeParams {
    fn default() -> Self {
        ComputeParams {
            max_containers: 20,
            min_containers: 1,
            rate_levels_mbps: vec![0.0, 50.0, 70.0, 90.0, 105.0],
            container_idle_j: 4.0,
            container_max_j: 10.0,
            switching_cost_j: 0.005,
            max_processing_time_s: 0.8,
            max_container_load_bits: 80_000_000,
            nic_idle_j: 13.1,
            nic_max_j: 20.0,
            nic_formula: NicFormula::Corrected,
            link_power_w: 1.0,
            link_rtt_s: 1e-6,
            min_link_rate_bps: 1e6,
            max_link_rate_bps: 1e8,
            max_drivers: 6,
            driver_energy_j_per_s: 1.0,
            driver_capacity_bits: 16_666_667,
            input_buffer_bits: 100_000_000,
            output_buffer_bits: 100_000_000,
            cache_response_factor: 0.5,
            cache_transmission_j: 2.0,
            cache_storage_j: 3.0,
            slot_s: 1800.0,
            deadline_s: 1800.0,
        }
    }
}

impl ComputeParams {
    pub fn max_rate_mbps(&self) -> f64 {
        self.rate_levels_mbps.last().copied().unwrap_or(0.0)
    }

    pub fn is_rate_level(&self, f: f64) -> bool {
        self.rate_levels_mbps.iter().any(|&l| l == f)
    }

    /// Bits a container running at `rate_mbps` can take in one slot.
    pub fn container_capacity_bits(&self, rate_mbps: f64) -> u64 {
        let processing = (rate_mbps * 1e6 * self.max_processing_time_s).floor() as u64;
        processing.min(self.max_container_load_bits)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_containers < 1 {
            return Err(Error::config("compute.min_containers", "must be at least 1"));
        }
        if self.min_containers > self.max_containers {
            return Err(Error::config("compute.min_containers", "must not exceed max_containers"));
        }
        if !(self.max_processing_time_s > 0.0 && self.max_processing_time_s < self.slot_s) {
            return Err(Error::config("compute.max_processing_time_s", "must lie strictly between 0 and slot_s"));
        }
        let levels = &self.rate_levels_mbps;
        if levels.first() != Some(&0.0) {
            return Err(Error::config("compute.rate_levels_mbps", "first level must be 0"));
        }
        if levels.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::config("compute.rate_levels_mbps", "levels must be strictly ascending"));
        }
        if !(self.min_link_rate_bps > 0.0) {
            return Err(Error::config("compute.min_link_rate_bps", "must be positive"));
        }
        if self.min_link_rate_bps > self.max_link_rate_bps {
            return Err(Error::config("compute.min_link_rate_bps", "must not exceed max_link_rate_bps"));
        }
        if !(self.deadline_s > 0.0) {
            return Err(Error::config("compute.deadline_s", "must be positive"));
        }
        if self.container_max_j < self.container_idle_j {
            return Err(Error::config("compute.container_max_j", "must be at least container_idle_j"));
        }
        for (name, v) in [
            ("compute.container_idle_j", self.container_idle_j),
            ("compute.switching_cost_j", self.switching_cost_j),
            ("compute.nic_idle_j", self.nic_idle_j),
            ("compute.nic_max_j", self.nic_max_j),
            ("compute.link_power_w", self.link_power_w),
            ("compute.link_rtt_s", self.link_rtt_s),
            ("compute.driver_energy_j_per_s", self.driver_energy_j_per_s),
            ("compute.cache_response_factor", self.cache_response_factor),
            ("compute.cache_transmission_j", self.cache_transmission_j),
            ("compute.cache_storage_j", self.cache_storage_j),
        ] {
            if !(v >= 0.0) {
                return Err(Error::config(name, "must be non-negative"));
            }
        }
        Ok(())
    }
}
