//! Per-slot energy accounting, queue evolution and QoS checks for the shared
//! site.
//!
//! Power figures (W) become per-slot joules by multiplying with the slot
//! length; per-event costs are joules already.

mod energy;
mod params;
mod qos;
mod queue;

use serde::{Deserialize, Serialize};

pub use energy::{
    cache_energy, comm_energy, comp_energy, cp_energy, laser_energy, link_energy, load_power, offload_energy,
    site_energy, sw_energy,
};
pub(crate) use energy::{link_rate, link_totals};
pub use params::{dbm_per_hz_to_watts, ComputeParams, NicFormula, RadioParams};
pub use qos::{check_feasibility, delay_bound, path_delay, slot_delay, Feasibility, SERVICE_TIME_S};
pub use queue::{admit, queue_step, Admission};

/// Controller-visible site state at the start of a slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteState {
    pub zeta: f64,
    pub sigma: bool,
    pub containers: usize,
    pub drivers: usize,
    /// Stored energy (J).
    pub energy: f64,
    pub q_in: u64,
    pub q_out: u64,
    /// Per-container processing rates applied in the previous slot.
    pub f_prev: Vec<f64>,
}

impl SiteState {
    pub fn initial(energy: f64, min_containers: usize) -> Self {
        SiteState {
            zeta: 1.0,
            sigma: true,
            containers: min_containers,
            drivers: 0,
            energy,
            q_in: 0,
            q_out: 0,
            f_prev: vec![0.0; min_containers],
        }
    }
}

/// A fully resolved slot decision: knob settings plus the workload
/// allocation, link rates and driver transfers they induce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    pub zeta: f64,
    pub sigma: bool,
    /// Processing rate per active container (Mbit/s); its length is the
    /// container count.
    pub rates: Vec<f64>,
    /// Admitted delay-sensitive workload.
    pub gamma_star: u64,
    /// Bits dispatched to each container this slot.
    pub gamma: Vec<u64>,
    /// Intra-server link rate per container (bit/s).
    pub link_rates: Vec<f64>,
    pub delta_nic: bool,
    pub drivers: usize,
    /// Bits moved out of the output buffer by each active driver.
    pub l_d: Vec<u64>,
}

impl ControlInput {
    pub fn containers(&self) -> usize {
        self.rates.len()
    }

    pub fn processed(&self) -> u64 {
        self.gamma.iter().sum()
    }

    pub fn dequeued(&self) -> u64 {
        self.l_d.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub comm: f64,
    pub cp: f64,
    pub sw: f64,
    pub of: f64,
    pub lk: f64,
    pub ls: f64,
    pub ch: f64,
    pub comp: f64,
    pub site: f64,
}

impl EnergyBreakdown {
    pub fn from_parts(comm: f64, cp: f64, sw: f64, of: f64, lk: f64, ls: f64, ch: f64) -> Self {
        let comp = cp + sw + of + lk + ls + ch;
        EnergyBreakdown { comm, cp, sw, of, lk, ls, ch, comp, site: comm + comp }
    }

    pub fn is_consistent(&self) -> bool {
        let parts = [self.comm, self.cp, self.sw, self.of, self.lk, self.ls, self.ch];
        let comp = self.cp + self.sw + self.of + self.lk + self.ls + self.ch;
        parts.iter().all(|p| *p >= 0.0)
            && (self.comp - comp).abs() <= 1e-9 * comp.abs().max(1.0)
            && (self.site - (self.comm + self.comp)).abs() <= 1e-9 * self.site.abs().max(1.0)
    }
}
