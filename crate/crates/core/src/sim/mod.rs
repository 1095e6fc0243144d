//! Slot-by-slot simulation of a controller driving the site over traces.

mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::battery::{classify, select_source, step, BatteryParams, Level, Source};
use crate::controller::{
    decide, max_capacity_energy, realize, ControlGrid, ControllerKind, CostWeights, Decision, F2Reference, Realized,
    SiteModel, SlotInputs,
};
use crate::error::{Error, Result};
use crate::forecast::{fit, PredictorConfig, PredictorSet};
use crate::site::{
    check_feasibility, delay_bound, path_delay, queue_step, slot_delay, ComputeParams, EnergyBreakdown, RadioParams,
    SiteState,
};
use crate::trace::TraceSeries;

pub use report::{write_report_csv, write_savings_csv, ReportWriter, REPORT_COLUMNS};

/// Exogenous inputs of a run, one value per slot. Traffic is a normalized
/// shape in [0, 1]; harvest is in joules per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Traces {
    pub traffic_a: TraceSeries,
    pub traffic_b: TraceSeries,
    pub solar: TraceSeries,
    pub wind: TraceSeries,
}

impl Traces {
    pub fn len(&self) -> usize {
        [&self.traffic_a, &self.traffic_b, &self.solar, &self.wind].iter().map(|s| s.len()).min().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub radio: RadioParams,
    pub compute: ComputeParams,
    pub battery: BatteryParams,
    pub controller: ControllerKind,
    pub weights: CostWeights,
    pub f2_reference: F2Reference,
    pub reservation_fraction: f64,
    pub horizon: usize,
    pub grid: ControlGrid,
    pub n_users: usize,
    pub n_slots: usize,
    /// Leading slots used only to fit the predictors.
    pub warmup_slots: usize,
    pub per_user_demand_bits: f64,
    pub sensitive_fraction: f64,
    pub traffic_predictor: PredictorConfig,
    pub harvest_predictor: PredictorConfig,
    pub traces: Traces,
}

impl Scenario {
    /// Offered load of one operator; users are split evenly between the two.
    pub fn operator_load(&self, shape: f64) -> u64 {
        (shape.max(0.0) * self.n_users as f64 / 2.0 * self.per_user_demand_bits).round() as u64
    }

    pub fn validate(&self) -> Result<()> {
        self.radio.validate()?;
        self.compute.validate()?;
        self.battery.validate()?;
        self.grid.validate(&self.compute)?;
        if self.horizon == 0 {
            return Err(Error::config("controller.horizon", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.sensitive_fraction) {
            return Err(Error::config("scenario.sensitive_fraction", "must lie in [0, 1]"));
        }
        if !(self.per_user_demand_bits >= 0.0) {
            return Err(Error::config("scenario.per_user_demand_bits", "must be non-negative"));
        }
        let needed = self.warmup_slots + self.n_slots;
        if self.traces.len() < needed {
            return Err(Error::NotEnoughData { needed, got: self.traces.len() });
        }
        let f = check_feasibility(&self.compute, self.compute.input_buffer_bits);
        if !f.feasible {
            return Err(Error::Infeasible(f.detail));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<SiteModel> {
        SiteModel::new(
            self.radio.clone(),
            self.compute.clone(),
            self.battery.clone(),
            self.sensitive_fraction,
            self.battery.offpeak_fraction * self.traces.solar.max(),
            self.weights,
            self.f2_reference,
        )
    }
}

/// Slot energy of the site dimensioned for maximum capacity.
pub fn baseline_energy(scenario: &Scenario) -> Result<f64> {
    Ok(max_capacity_energy(&scenario.radio, &scenario.compute, scenario.sensitive_fraction)?.site)
}

/// Everything observed in one simulated slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub slot: usize,
    pub load_a: u64,
    pub load_b: u64,
    pub offered_sensitive: u64,
    pub gamma_star: u64,
    pub processed: u64,
    pub dequeued: u64,
    pub q_in: u64,
    pub q_out: u64,
    pub sigma: bool,
    pub zeta: f64,
    pub containers: usize,
    pub rate_mbps: f64,
    pub drivers: usize,
    pub delta_nic: bool,
    pub energy: EnergyBreakdown,
    pub solar_j: f64,
    pub wind_j: f64,
    pub harvest_j: f64,
    pub source: Source,
    pub battery_before_j: f64,
    pub battery_after_j: f64,
    pub level: Level,
    pub cost: f64,
    pub expected_cost: f64,
    pub slot_delay_s: f64,
    pub path_delay_s: f64,
    pub emergency: bool,
    /// The chosen setting exceeded the stored energy once realized and the
    /// emergency setting ran instead.
    pub fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComponentShares {
    pub comm: f64,
    pub cp: f64,
    pub sw: f64,
    pub of: f64,
    pub lk: f64,
    pub ls: f64,
    pub ch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub controller: ControllerKind,
    pub n_users: usize,
    pub n_slots: usize,
    pub baseline_energy_j: f64,
    pub mean_site_energy_j: f64,
    pub savings_percent: f64,
    pub shares: ComponentShares,
    pub violations: usize,
    pub deficient_slots: usize,
    pub emergency_slots: usize,
    pub fallback_slots: usize,
    pub offered_sensitive_bits: u64,
    pub admitted_bits: u64,
    pub max_slot_delay_s: f64,
    pub max_path_delay_s: f64,
    pub delay_bound_s: f64,
    pub min_battery_j: f64,
    pub final_battery_j: f64,
    #[serde(skip)]
    pub records: Vec<SlotRecord>,
}

/// Runs the scenario, keeping every slot record in the report.
pub fn run(scenario: &Scenario) -> Result<SimReport> {
    let mut records = Vec::with_capacity(scenario.n_slots);
    let mut report = run_streaming(scenario, |r| {
        records.push(r.clone());
        Ok(())
    })?;
    report.records = records;
    Ok(report)
}

fn invariant(slot: usize, msg: impl Into<String>) -> Error {
    Error::Invariant { slot, msg: msg.into() }
}

/// Runs the scenario, handing each slot record to `sink` as soon as the slot
/// completes. The returned report carries aggregates only.
pub fn run_streaming(scenario: &Scenario, mut sink: impl FnMut(&SlotRecord) -> Result<()>) -> Result<SimReport> {
    scenario.validate()?;
    let model = scenario.model()?;
    let cp = &scenario.compute;
    let warmup = scenario.warmup_slots;
    let traces = &scenario.traces;
    let baseline = baseline_energy(scenario)?;
    let bound = delay_bound(cp.input_buffer_bits, cp.output_buffer_bits, cp.min_link_rate_bps);

    let load_a: Vec<f64> = traces.traffic_a.values.iter().map(|&v| scenario.operator_load(v) as f64).collect();
    let load_b: Vec<f64> = traces.traffic_b.values.iter().map(|&v| scenario.operator_load(v) as f64).collect();
    let solar = &traces.solar.values;
    let wind = &traces.wind.values;
    let prefix = |v: &[f64], label| TraceSeries::new(label, traces.solar.slot_duration, v[..warmup].to_vec());
    // The warm-up prefix is history only, so predictors train on all of it.
    let traffic_cfg = PredictorConfig { train_fraction: 1.0, ..scenario.traffic_predictor.clone() };
    let harvest_cfg = PredictorConfig { train_fraction: 1.0, ..scenario.harvest_predictor.clone() };
    let predictors = PredictorSet {
        traffic_a: fit(&prefix(&load_a, traces.traffic_a.label), &traffic_cfg)?,
        traffic_b: fit(&prefix(&load_b, traces.traffic_b.label), &traffic_cfg)?,
        solar: fit(&prefix(solar, traces.solar.label), &harvest_cfg)?,
        wind: fit(&prefix(wind, traces.wind.label), &harvest_cfg)?,
    };

    let mut state = SiteState::initial(scenario.battery.initial_j, cp.min_containers);
    let mut acc = Accumulator::new(baseline, bound, state.energy);
    for t in 0..scenario.n_slots {
        let now = warmup + t;
        let window = predictors.forecast(&load_a[..now], &load_b[..now], &solar[..now], &wind[..now], scenario.horizon);
        let window = SlotInputs::window(&window);
        let decision = decide(scenario.controller, &state, &window, &scenario.grid, &model, scenario.reservation_fraction)
            .map_err(|e| invariant(t, format!("controller failed: {e}")))?;

        let (a, b) = (load_a[now] as u64, load_b[now] as u64);
        let mut fallback = false;
        let mut setting = decision.setting;
        let mut realized = realize(&state, &setting, a, b, &model).map_err(|e| invariant(t, e.to_string()))?;
        let emergency = scenario.grid.emergency(cp);
        let reserve = if setting == emergency { 0.0 } else { model.reserve_j };
        if realized.energy.site + reserve > state.energy {
            fallback = true;
            setting = emergency;
            realized = realize(&state, &setting, a, b, &model).map_err(|e| invariant(t, e.to_string()))?;
        }
        let record = apply(t, &mut state, &decision, &setting, realized, fallback, (a, b), solar[now], wind[now], &model, bound)?;
        acc.add(&record);
        sink(&record)?;
    }
    Ok(acc.finish(scenario))
}

#[allow(clippy::too_many_arguments)]
fn apply(
    t: usize,
    state: &mut SiteState,
    decision: &Decision,
    setting: &crate::controller::Setting,
    realized: Realized,
    fallback: bool,
    loads: (u64, u64),
    solar: f64,
    wind: f64,
    model: &SiteModel,
    bound: f64,
) -> Result<SlotRecord> {
    let cp = &model.compute;
    let Realized { control, admission, energy } = realized;
    if !energy.is_consistent() {
        return Err(invariant(t, "energy breakdown does not add up"));
    }
    let before = state.energy;
    let harvest = select_source(solar, wind, before, model.offpeak_threshold_j, &model.battery);
    let after = step(before, harvest.selected, energy.site, &model.battery).map_err(|e| invariant(t, e.to_string()))?;
    let uncapped = before + harvest.selected - energy.site - model.battery.leakage_j;
    let expected = uncapped.min(model.battery.capacity_j).max(0.0);
    if (after - expected).abs() > 1e-9 * expected.abs().max(1.0) || !(0.0..=model.battery.capacity_j).contains(&after) {
        return Err(invariant(t, format!("battery ledger does not close: {after} J vs {expected} J")));
    }
    let (q_in, q_out) = queue_step(
        state.q_in,
        state.q_out,
        control.gamma_star,
        control.processed(),
        control.dequeued(),
        cp.input_buffer_bits,
        cp.output_buffer_bits,
    )
    .map_err(|e| invariant(t, e.to_string()))?;
    let delay = slot_delay(&control, cp);
    if delay > cp.deadline_s {
        return Err(invariant(t, format!("slot delay {delay} s above the {} s deadline", cp.deadline_s)));
    }
    let path = path_delay(q_in, q_out, cp.min_link_rate_bps);
    if path > bound {
        return Err(invariant(t, format!("path delay {path} s above the {bound} s bound")));
    }
    let cost = crate::controller::cost_j(energy.site, &admission, model);
    let record = SlotRecord {
        slot: t,
        load_a: loads.0,
        load_b: loads.1,
        offered_sensitive: admission.offered_sensitive,
        gamma_star: control.gamma_star,
        processed: control.processed(),
        dequeued: control.dequeued(),
        q_in,
        q_out,
        sigma: setting.sigma,
        zeta: setting.zeta,
        containers: setting.containers,
        rate_mbps: setting.rate,
        drivers: setting.drivers,
        delta_nic: setting.delta_nic,
        energy,
        solar_j: harvest.solar,
        wind_j: harvest.wind,
        harvest_j: harvest.selected,
        source: harvest.source,
        battery_before_j: before,
        battery_after_j: after,
        level: classify(after, &model.battery),
        cost,
        expected_cost: decision.expected_cost,
        slot_delay_s: delay,
        path_delay_s: path,
        emergency: decision.emergency || fallback,
        fallback,
    };
    *state = SiteState {
        zeta: setting.zeta,
        sigma: setting.sigma,
        containers: setting.containers,
        drivers: setting.drivers,
        energy: after,
        q_in,
        q_out,
        f_prev: control.rates,
    };
    Ok(record)
}

struct Accumulator {
    baseline: f64,
    bound: f64,
    n: usize,
    parts: [f64; 7],
    site: f64,
    deficient: usize,
    emergency: usize,
    fallback: usize,
    offered: u64,
    admitted: u64,
    max_slot_delay: f64,
    max_path_delay: f64,
    min_battery: f64,
    last_battery: f64,
}

impl Accumulator {
    fn new(baseline: f64, bound: f64, battery: f64) -> Self {
        Accumulator {
            baseline,
            bound,
            n: 0,
            parts: [0.0; 7],
            site: 0.0,
            deficient: 0,
            emergency: 0,
            fallback: 0,
            offered: 0,
            admitted: 0,
            max_slot_delay: 0.0,
            max_path_delay: 0.0,
            min_battery: battery,
            last_battery: battery,
        }
    }

    fn add(&mut self, r: &SlotRecord) {
        let e = &r.energy;
        for (acc, v) in self.parts.iter_mut().zip([e.comm, e.cp, e.sw, e.of, e.lk, e.ls, e.ch]) {
            *acc += v;
        }
        self.n += 1;
        self.site += e.site;
        self.deficient += usize::from(r.level == Level::Deficient);
        self.emergency += usize::from(r.emergency);
        self.fallback += usize::from(r.fallback);
        self.offered += r.offered_sensitive;
        self.admitted += r.gamma_star;
        self.max_slot_delay = self.max_slot_delay.max(r.slot_delay_s);
        self.max_path_delay = self.max_path_delay.max(r.path_delay_s);
        self.min_battery = self.min_battery.min(r.battery_after_j);
        self.last_battery = r.battery_after_j;
    }

    fn finish(self, scenario: &Scenario) -> SimReport {
        let mean = if self.n > 0 { self.site / self.n as f64 } else { 0.0 };
        let share = |i: usize| if self.site > 0.0 { self.parts[i] / self.site } else { 0.0 };
        SimReport {
            controller: scenario.controller,
            n_users: scenario.n_users,
            n_slots: self.n,
            baseline_energy_j: self.baseline,
            mean_site_energy_j: mean,
            savings_percent: 100.0 * (1.0 - mean / self.baseline),
            shares: ComponentShares {
                comm: share(0),
                cp: share(1),
                sw: share(2),
                of: share(3),
                lk: share(4),
                ls: share(5),
                ch: share(6),
            },
            violations: 0,
            deficient_slots: self.deficient,
            emergency_slots: self.emergency,
            fallback_slots: self.fallback,
            offered_sensitive_bits: self.offered,
            admitted_bits: self.admitted,
            max_slot_delay_s: self.max_slot_delay,
            max_path_delay_s: self.max_path_delay,
            delay_bound_s: self.bound,
            min_battery_j: self.min_battery,
            final_battery_j: self.last_battery,
            records: Vec::new(),
        }
    }
}

/// Mean savings of both controllers at one user count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SavingsPoint {
    pub n_users: usize,
    pub drc_rs: f64,
    pub rrm: f64,
}

pub const DEFAULT_USER_COUNTS: [usize; 10] = [5, 10, 15, 20, 25, 30, 35, 40, 45, 50];

/// Savings of the lookahead and reservation controllers for each user
/// count, with traffic scaled to the count. Points run in parallel.
pub fn savings_curve(template: &Scenario, user_counts: &[usize]) -> Result<Vec<SavingsPoint>> {
    let jobs: Vec<(usize, ControllerKind)> = user_counts
        .iter()
        .flat_map(|&n| [(n, ControllerKind::DrcRs), (n, ControllerKind::Rrm)])
        .collect();
    let results: Vec<f64> = jobs
        .par_iter()
        .map(|&(n_users, controller)| {
            let scenario = Scenario { n_users, controller, ..template.clone() };
            run_streaming(&scenario, |_| Ok(())).map(|r| r.savings_percent)
        })
        .collect::<Result<_>>()?;
    Ok(user_counts
        .iter()
        .enumerate()
        .map(|(i, &n_users)| SavingsPoint { n_users, drc_rs: results[2 * i], rrm: results[2 * i + 1] })
        .collect())
}
