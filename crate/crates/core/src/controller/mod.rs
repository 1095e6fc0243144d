//! Slot-level resource controllers for the shared site.
//!
//! A [`Setting`] fixes the knobs (base-station mode, bandwidth fraction,
//! container count and rate, driver count, offload engine). Realizing a
//! setting against a state and a pair of operator loads yields the full
//! [`ControlInput`], its energy and the successor state.

mod lookahead;
mod rrm;

use serde::{Deserialize, Serialize};

use crate::battery::{select_source, step_unchecked, BatteryParams, HarvestSlot};
use crate::error::{Error, Result};
use crate::forecast::ForecastWindow;
use crate::site::{
    admit, link_energy, queue_step, site_energy, slot_delay, Admission, ComputeParams, ControlInput, EnergyBreakdown,
    RadioParams, SiteState,
};

pub use lookahead::{drc_rs, exhaustive};
pub use rrm::{rrm, rrm_setting};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    /// Weight of the energy term; the admission term gets the complement.
    pub upsilon: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights { upsilon: 0.5 }
    }
}

/// What admitted load is compared against in the admission term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum F2Reference {
    /// Offered delay-sensitive load: penalizes rejected traffic.
    #[default]
    Offered,
    /// Input-buffer capacity.
    Capacity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    DrcRs,
    Rrm,
    Oracle,
}

impl ControllerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ControllerKind::DrcRs => "drc_rs",
            ControllerKind::Rrm => "rrm",
            ControllerKind::Oracle => "oracle",
        }
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drc_rs" | "drc-rs" => Ok(ControllerKind::DrcRs),
            "rrm" => Ok(ControllerKind::Rrm),
            "oracle" => Ok(ControllerKind::Oracle),
            other => Err(Error::config("controller.kind", format!("unknown controller `{other}`"))),
        }
    }
}

/// One point of the discrete control space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub sigma: bool,
    pub zeta: f64,
    pub containers: usize,
    /// Rate applied to every active container (Mbit/s).
    pub rate: f64,
    pub drivers: usize,
    pub delta_nic: bool,
}

/// Axes of the control space, enumerated outer to inner as
/// sigma, zeta, containers, rate, drivers, offload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlGrid {
    pub sigma_options: Vec<bool>,
    pub zeta_levels: Vec<f64>,
    pub container_counts: Vec<usize>,
    pub rate_levels: Vec<f64>,
    pub driver_counts: Vec<usize>,
    pub nic_options: Vec<bool>,
}

impl Default for ControlGrid {
    fn default() -> Self {
        ControlGrid::full(&ComputeParams::default())
    }
}

impl ControlGrid {
    /// Every admissible knob value for the given compute platform.
    pub fn full(cp: &ComputeParams) -> Self {
        ControlGrid {
            sigma_options: vec![false, true],
            zeta_levels: (1..=10).map(|i| i as f64 / 10.0).collect(),
            container_counts: (cp.min_containers..=cp.max_containers).collect(),
            rate_levels: cp.rate_levels_mbps.clone(),
            driver_counts: (0..=cp.max_drivers).collect(),
            nic_options: vec![false, true],
        }
    }

    pub fn len(&self) -> usize {
        self.sigma_options.len()
            * self.zeta_levels.len()
            * self.container_counts.len()
            * self.rate_levels.len()
            * self.driver_counts.len()
            * self.nic_options.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self, cp: &ComputeParams) -> Result<()> {
        if self.is_empty() {
            return Err(Error::config("controller.grid", "every axis needs at least one value"));
        }
        if self.zeta_levels.iter().any(|&z| !(z > 0.0 && z <= 1.0)) {
            return Err(Error::config("controller.grid.zeta_levels", "levels must lie in (0, 1]"));
        }
        if self.container_counts.iter().any(|&c| c < cp.min_containers || c > cp.max_containers) {
            return Err(Error::config("controller.grid.container_counts", "counts must lie in [min, max] containers"));
        }
        if self.rate_levels.iter().any(|&f| !cp.is_rate_level(f)) {
            return Err(Error::config("controller.grid.rate_levels", "rates must be configured rate levels"));
        }
        if self.driver_counts.iter().any(|&d| d > cp.max_drivers) {
            return Err(Error::config("controller.grid.driver_counts", "counts must not exceed max_drivers"));
        }
        Ok(())
    }

    /// All settings in enumeration order.
    pub fn settings(&self) -> Vec<Setting> {
        let mut out = Vec::with_capacity(self.len());
        for &sigma in &self.sigma_options {
            for &zeta in &self.zeta_levels {
                for &containers in &self.container_counts {
                    for &rate in &self.rate_levels {
                        for &drivers in &self.driver_counts {
                            for &delta_nic in &self.nic_options {
                                out.push(Setting { sigma, zeta, containers, rate, drivers, delta_nic });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Position of a setting in enumeration order, if it lies on the grid.
    pub fn index_of(&self, s: &Setting) -> Option<usize> {
        let pos = |n: usize, i: Option<usize>| i.map(|i| (n, i));
        let axes = [
            pos(self.sigma_options.len(), self.sigma_options.iter().position(|&v| v == s.sigma))?,
            pos(self.zeta_levels.len(), self.zeta_levels.iter().position(|&v| v == s.zeta))?,
            pos(self.container_counts.len(), self.container_counts.iter().position(|&v| v == s.containers))?,
            pos(self.rate_levels.len(), self.rate_levels.iter().position(|&v| v == s.rate))?,
            pos(self.driver_counts.len(), self.driver_counts.iter().position(|&v| v == s.drivers))?,
            pos(self.nic_options.len(), self.nic_options.iter().position(|&v| v == s.delta_nic))?,
        ];
        Some(axes.iter().fold(0, |acc, &(n, i)| acc * n + i))
    }

    /// The fallback setting: base station asleep, minimum idle containers,
    /// no transfers.
    pub fn emergency(&self, cp: &ComputeParams) -> Setting {
        let zeta = self.zeta_levels.iter().copied().fold(f64::INFINITY, f64::min);
        Setting {
            sigma: false,
            zeta: if zeta.is_finite() { zeta } else { 1.0 },
            containers: cp.min_containers,
            rate: 0.0,
            drivers: 0,
            delta_nic: false,
        }
    }
}

/// Static description of the site the controllers act on.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteModel {
    pub radio: RadioParams,
    pub compute: ComputeParams,
    pub battery: BatteryParams,
    pub sensitive_fraction: f64,
    /// Solar harvest below this level selects wind.
    pub offpeak_threshold_j: f64,
    pub weights: CostWeights,
    pub f2_reference: F2Reference,
    /// Slot energy of the maximum-capacity site, used to normalize cost.
    pub reference_energy_j: f64,
    /// Stored energy every non-emergency setting must leave behind: the
    /// largest emergency draw plus one slot of leakage.
    pub reserve_j: f64,
}

impl SiteModel {
    pub fn new(
        radio: RadioParams,
        compute: ComputeParams,
        battery: BatteryParams,
        sensitive_fraction: f64,
        offpeak_threshold_j: f64,
        weights: CostWeights,
        f2_reference: F2Reference,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&weights.upsilon) {
            return Err(Error::config("controller.upsilon", "must lie in [0, 1]"));
        }
        let reference = max_capacity_energy(&radio, &compute, sensitive_fraction)?.site;
        let mut model = SiteModel {
            radio,
            compute,
            battery,
            sensitive_fraction,
            offpeak_threshold_j,
            weights,
            f2_reference,
            reference_energy_j: reference,
            reserve_j: 0.0,
        };
        model.reserve_j = emergency_ceiling(&model)? + model.battery.leakage_j;
        Ok(model)
    }

    /// Default site with the given harvest off-peak threshold.
    pub fn with_defaults(offpeak_threshold_j: f64) -> Self {
        SiteModel::new(
            RadioParams::default(),
            ComputeParams::default(),
            BatteryParams::default(),
            crate::trace::DEFAULT_SENSITIVE_FRACTION,
            offpeak_threshold_j,
            CostWeights::default(),
            F2Reference::default(),
        )
        .expect("default parameters are valid")
    }
}

/// Emergency draw after a slot with every container at the top rate, which
/// maximizes the switching term.
fn emergency_ceiling(model: &SiteModel) -> Result<f64> {
    let cp = &model.compute;
    let mut state = SiteState::initial(0.0, cp.min_containers);
    state.f_prev = vec![cp.max_rate_mbps(); cp.max_containers];
    let setting = Setting {
        sigma: false,
        zeta: 1.0,
        containers: cp.min_containers,
        rate: 0.0,
        drivers: 0,
        delta_nic: false,
    };
    Ok(realize(&state, &setting, 0, 0, model)?.energy.site)
}

/// Slot energy of the site dimensioned for maximum capacity: every knob at
/// its maximum and both buffers moving a full capacity worth of traffic.
pub fn max_capacity_energy(radio: &RadioParams, cp: &ComputeParams, sensitive_fraction: f64) -> Result<EnergyBreakdown> {
    let f_max = cp.max_rate_mbps();
    let gamma_star = cp.input_buffer_bits;
    let gamma = allocate_tasks(gamma_star, cp.max_containers, cp.container_capacity_bits(f_max))?;
    let (link_rates, _) = link_energy(&gamma, cp)?;
    let dequeued = cp.output_buffer_bits.min(cp.max_drivers as u64 * cp.driver_capacity_bits);
    let control = ControlInput {
        zeta: 1.0,
        sigma: true,
        rates: vec![f_max; cp.max_containers],
        gamma_star,
        gamma,
        link_rates,
        delta_nic: true,
        drivers: cp.max_drivers,
        l_d: split_even(dequeued, cp.max_drivers),
    };
    let offered = if sensitive_fraction > 0.0 { gamma_star as f64 / sensitive_fraction } else { gamma_star as f64 };
    site_energy(&control, &control.rates.clone(), offered, radio, cp)
}

/// Equal split of `total` bits over `containers`, remainder bits going to the
/// lowest-index containers.
pub fn allocate_tasks(total: u64, containers: usize, per_container_cap: u64) -> Result<Vec<u64>> {
    if total > containers as u64 * per_container_cap {
        return Err(Error::InfeasibleAllocation { gamma: total, containers, cap: per_container_cap });
    }
    Ok(split_even(total, containers))
}

pub(crate) fn split_even(total: u64, parts: usize) -> Vec<u64> {
    if parts == 0 {
        return Vec::new();
    }
    let n = parts as u64;
    let (base, extra) = (total / n, total % n);
    (0..n).map(|i| base + u64::from(i < extra)).collect()
}

/// Per-slot forecast (or realization) of the exogenous processes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotInputs {
    pub load_a: u64,
    pub load_b: u64,
    pub solar: f64,
    pub wind: f64,
}

impl SlotInputs {
    pub fn window(w: &ForecastWindow) -> Vec<SlotInputs> {
        let bits = |v: f64| if v > 0.0 { v.round() as u64 } else { 0 };
        (0..w.horizon())
            .map(|k| SlotInputs {
                load_a: bits(w.load_a[k]),
                load_b: bits(w.load_b[k]),
                solar: w.solar[k].max(0.0),
                wind: w.wind[k].max(0.0),
            })
            .collect()
    }

    pub fn total_load(&self) -> u64 {
        self.load_a + self.load_b
    }
}

/// A setting resolved against one state and one pair of loads.
#[derive(Debug, Clone, PartialEq)]
pub struct Realized {
    pub control: ControlInput,
    pub admission: Admission,
    pub energy: EnergyBreakdown,
}

/// Resolves a setting into a concrete control.
///
/// Admission is capped by the free input-buffer space, and processing by
/// what the containers can take and what the output buffer plus the active
/// drivers can absorb, so the buffers never overflow.
pub fn realize(state: &SiteState, s: &Setting, load_a: u64, load_b: u64, model: &SiteModel) -> Result<Realized> {
    let cp = &model.compute;
    if !cp.is_rate_level(s.rate) {
        return Err(Error::InvalidLevel(s.rate));
    }
    if s.containers < cp.min_containers || s.containers > cp.max_containers {
        return Err(Error::InfeasibleControl(format!("{} containers outside the allowed range", s.containers)));
    }
    if s.drivers > cp.max_drivers {
        return Err(Error::InfeasibleControl(format!("{} drivers requested, {} available", s.drivers, cp.max_drivers)));
    }
    let free = if s.sigma { cp.input_buffer_bits.saturating_sub(state.q_in) } else { 0 };
    let admission = admit(load_a, load_b, model.sensitive_fraction, free)?;
    let per_container = cp.container_capacity_bits(s.rate);
    let drain = s.drivers as u64 * cp.driver_capacity_bits;
    let out_room = (cp.output_buffer_bits + drain).saturating_sub(state.q_out);
    let work = (state.q_in + admission.gamma_star).min(s.containers as u64 * per_container).min(out_room);
    let gamma = allocate_tasks(work, s.containers, per_container)?;
    let (link_rates, _) = link_energy(&gamma, cp)?;
    let dequeued = (state.q_out + work).min(drain);
    let control = ControlInput {
        zeta: s.zeta,
        sigma: s.sigma,
        rates: vec![s.rate; s.containers],
        gamma_star: admission.gamma_star,
        gamma,
        link_rates,
        delta_nic: s.delta_nic,
        drivers: s.drivers,
        l_d: split_even(dequeued, s.drivers),
    };
    let energy = site_energy(&control, &state.f_prev, (load_a + load_b) as f64, &model.radio, cp)?;
    Ok(Realized { control, admission, energy })
}

/// Weighted, normalized slot cost of a realized control.
pub fn cost_j(site_energy_j: f64, admission: &Admission, model: &SiteModel) -> f64 {
    let energy_term = site_energy_j / model.reference_energy_j;
    let (admitted, reference) = match model.f2_reference {
        F2Reference::Offered => (admission.gamma_star as f64, admission.offered_sensitive as f64),
        F2Reference::Capacity => (admission.gamma_star as f64, model.compute.input_buffer_bits as f64),
    };
    let gap_term = if reference > 0.0 { ((admitted - reference) / reference).powi(2) } else { 0.0 };
    let u = model.weights.upsilon;
    u * energy_term + (1.0 - u) * gap_term
}

/// A realized setting together with the state it leads to.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub realized: Realized,
    pub harvest: HarvestSlot,
    pub next: SiteState,
    pub cost: f64,
}

/// Applies a setting for one slot. Harvest is selected from the given
/// solar and wind figures against the state's stored energy; the battery
/// update is floored and capped but not checked against availability.
pub fn transition(state: &SiteState, s: &Setting, inputs: &SlotInputs, model: &SiteModel) -> Result<Outcome> {
    let realized = realize(state, s, inputs.load_a, inputs.load_b, model)?;
    let harvest = select_source(inputs.solar, inputs.wind, state.energy, model.offpeak_threshold_j, &model.battery);
    let energy = step_unchecked(state.energy, harvest.selected, realized.energy.site, &model.battery);
    let cp = &model.compute;
    let c = &realized.control;
    let (q_in, q_out) =
        queue_step(state.q_in, state.q_out, c.gamma_star, c.processed(), c.dequeued(), cp.input_buffer_bits, cp.output_buffer_bits)?;
    let next = SiteState {
        zeta: s.zeta,
        sigma: s.sigma,
        containers: s.containers,
        drivers: s.drivers,
        energy,
        q_in,
        q_out,
        f_prev: c.rates.clone(),
    };
    let cost = cost_j(realized.energy.site, &realized.admission, model);
    Ok(Outcome { realized, harvest, next, cost })
}

/// Checks a transition against the slot constraints. The emergency setting
/// only has to fit in the stored energy and the delay budget; every other
/// setting must also leave the emergency reserve in the battery.
pub fn admissible(state: &SiteState, s: &Setting, outcome: &Outcome, emergency: bool, model: &SiteModel) -> bool {
    let cp = &model.compute;
    let c = &outcome.realized.control;
    if outcome.realized.energy.site > state.energy || slot_delay(c, cp) > cp.deadline_s {
        return false;
    }
    if emergency {
        return true;
    }
    outcome.realized.energy.site + model.reserve_j <= state.energy
        && c.processed() == state.q_in + c.gamma_star
        && (outcome.next.q_out == 0 || s.drivers == cp.max_drivers)
        && outcome.next.energy >= model.battery.low_j
}

/// An admissible setting with its grid position and transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub setting: Setting,
    /// Enumeration index; settings off the grid sort after every grid point.
    pub index: usize,
    pub emergency: bool,
    pub outcome: Outcome,
}

impl Candidate {
    /// Deterministic preference among equally costly candidates.
    pub fn tie_key(&self) -> (f64, usize, usize, f64, usize) {
        tie_key(&self.setting, self.outcome.realized.energy.site, self.index)
    }
}

pub(crate) fn tie_key(s: &Setting, site_energy_j: f64, index: usize) -> (f64, usize, usize, f64, usize) {
    (site_energy_j, s.containers, s.drivers, s.zeta, index)
}

/// Every admissible setting of the grid in enumeration order, followed by
/// the emergency setting when it is admissible and not already listed.
/// When nothing is admissible the emergency setting is returned unchecked.
pub fn enumerate_controls(state: &SiteState, grid: &ControlGrid, inputs: &SlotInputs, model: &SiteModel) -> Result<Vec<Candidate>> {
    let emergency = grid.emergency(&model.compute);
    let mut out = Vec::new();
    let mut emergency_listed = false;
    for (index, s) in grid.settings().into_iter().enumerate() {
        let Ok(outcome) = transition(state, &s, inputs, model) else { continue };
        let is_emergency = s == emergency;
        if admissible(state, &s, &outcome, is_emergency, model) {
            emergency_listed |= is_emergency;
            out.push(Candidate { setting: s, index, emergency: is_emergency, outcome });
        }
    }
    if !emergency_listed {
        let outcome = transition(state, &emergency, inputs, model)?;
        let admissible = admissible(state, &emergency, &outcome, true, model);
        if admissible || out.is_empty() {
            out.push(Candidate { setting: emergency, index: grid.len(), emergency: true, outcome });
        }
    }
    Ok(out)
}

/// Outcome of one controller call.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub setting: Setting,
    /// Cumulative forecast cost of the chosen sequence.
    pub expected_cost: f64,
    pub emergency: bool,
}

/// Dispatches to the configured controller.
pub fn decide(
    kind: ControllerKind,
    state: &SiteState,
    window: &[SlotInputs],
    grid: &ControlGrid,
    model: &SiteModel,
    reservation_fraction: f64,
) -> Result<Decision> {
    match kind {
        ControllerKind::DrcRs => drc_rs(state, window, grid, model),
        ControllerKind::Oracle => exhaustive(state, window, grid, model),
        ControllerKind::Rrm => rrm(state, window, grid, model, reservation_fraction),
    }
}
