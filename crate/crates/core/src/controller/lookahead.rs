//! Limited-lookahead search over forecast control sequences.
//!
//! [`drc_rs`] expands the control tree breadth first and discards branches
//! that can never beat another branch reaching the same site state.
//! [`exhaustive`] walks every sequence and serves as its reference.

use std::cmp::Ordering;
use std::collections::HashMap;

use super::{
    admissible, cost_j, enumerate_controls, split_even, tie_key, transition, ControlGrid, Decision, Setting,
    SiteModel, SlotInputs,
};
use crate::battery::{select_source, step_unchecked};
use crate::error::{Error, Result};
use crate::site::{
    admit, cache_energy, comm_energy, cp_energy, link_rate, link_totals, load_power, offload_energy, sw_energy,
    ComputeParams, SiteState,
};

/// A branch of the search tree, reduced to what its future depends on.
/// Two branches with equal queues, container rates and battery class have
/// the same continuations, except that more stored energy never hurts.
#[derive(Debug, Clone)]
struct Node {
    energy: f64,
    q_in: u64,
    q_out: u64,
    f_prev: Vec<f64>,
}

impl Node {
    fn state(&self) -> SiteState {
        SiteState {
            zeta: 1.0,
            sigma: true,
            containers: self.f_prev.len(),
            drivers: 0,
            energy: self.energy,
            q_in: self.q_in,
            q_out: self.q_out,
            f_prev: self.f_prev.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Child {
    setting: Setting,
    index: usize,
    /// Position of (containers, rate) on the grid; one past the end for
    /// settings off the grid.
    bucket: usize,
    site_energy: f64,
    slot_cost: f64,
    energy: f64,
    q_in: u64,
    q_out: u64,
}

fn cmp_tie(a: &(f64, usize, usize, f64, usize), b: &(f64, usize, usize, f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0)
        .then(a.1.cmp(&b.1))
        .then(a.2.cmp(&b.2))
        .then(a.3.total_cmp(&b.3))
        .then(a.4.cmp(&b.4))
}

struct Expander<'a> {
    grid: &'a ControlGrid,
    model: &'a SiteModel,
    emergency: Setting,
    emergency_bucket: usize,
    cache_j: f64,
    offload_j: Vec<f64>,
    /// Processing energy and rate vector per (containers, rate) grid pair.
    cpu_j: Vec<Vec<f64>>,
    rates: Vec<Vec<Vec<f64>>>,
    capacity: Vec<u64>,
    /// Radio energy per bandwidth level, by (mode, admitted bits, load).
    comm: HashMap<(bool, u64, u64), Vec<f64>>,
    /// Link energy by (dispatched bits, containers); `None` when the
    /// allocation breaks the link-rate or delay limits.
    links: HashMap<(u64, usize), Option<f64>>,
}

impl<'a> Expander<'a> {
    fn new(grid: &'a ControlGrid, model: &'a SiteModel) -> Result<Self> {
        let cp = &model.compute;
        let mut cpu_j = Vec::new();
        let mut rates = Vec::new();
        for &c in &grid.container_counts {
            let row: Vec<Vec<f64>> = grid.rate_levels.iter().map(|&f| vec![f; c]).collect();
            cpu_j.push(row.iter().map(|r| cp_energy(r, cp)).collect::<Result<Vec<_>>>()?);
            rates.push(row);
        }
        let emergency = grid.emergency(cp);
        let buckets = grid.container_counts.len() * grid.rate_levels.len();
        let emergency_bucket = match (
            grid.container_counts.iter().position(|&c| c == emergency.containers),
            grid.rate_levels.iter().position(|&f| f == emergency.rate),
        ) {
            (Some(ci), Some(fi)) => ci * grid.rate_levels.len() + fi,
            _ => buckets,
        };
        Ok(Expander {
            grid,
            model,
            emergency,
            emergency_bucket,
            cache_j: cache_energy(cp.cache_response_factor, cp.cache_transmission_j, cp.cache_storage_j),
            offload_j: grid.nic_options.iter().map(|&d| offload_energy(d, cp)).collect(),
            cpu_j,
            rates,
            capacity: grid.rate_levels.iter().map(|&f| cp.container_capacity_bits(f)).collect(),
            comm: HashMap::new(),
            links: HashMap::new(),
        })
    }

    fn buckets(&self) -> usize {
        self.grid.container_counts.len() * self.grid.rate_levels.len() + 1
    }

    fn link_energy(cp: &ComputeParams, need: u64, containers: usize) -> Option<f64> {
        let gamma = split_even(need, containers);
        let (_, link) = link_totals(&gamma, cp).ok()?;
        let delay =
            gamma.iter().map(|&g| 2.0 * g as f64 / link_rate(g, cp)).fold(0.0, f64::max) + cp.max_processing_time_s;
        (delay <= cp.deadline_s).then_some(link)
    }

    /// A lower bound on the slot cost of any setting under these inputs.
    fn cost_floor(&self, inputs: &SlotInputs) -> Result<f64> {
        let (model, grid) = (self.model, self.grid);
        let (radio, cp) = (&model.radio, &model.compute);
        let backhaul = radio.backhaul_power_w * cp.slot_s;
        let u = model.weights.upsilon;
        let mut floor = f64::INFINITY;
        for &sigma in &grid.sigma_options {
            let bound = if sigma {
                let mut load = f64::INFINITY;
                for &z in &grid.zeta_levels {
                    load = load.min(load_power(inputs.total_load() as f64, z, radio)?);
                }
                u * (((radio.bs_operating_power_w * cp.slot_s + load) + backhaul) / model.reference_energy_j)
            } else {
                let idle = admit(inputs.load_a, inputs.load_b, model.sensitive_fraction, 0)?;
                cost_j(backhaul, &idle, model)
            };
            floor = floor.min(bound);
        }
        // The emergency setting is available whatever the grid says.
        let idle = admit(inputs.load_a, inputs.load_b, model.sensitive_fraction, 0)?;
        Ok(floor.min(cost_j(backhaul, &idle, model)))
    }

    /// Admissible children of a node, keeping per (mode, containers, rate)
    /// only the cheapest bandwidth/offload choice and the fewest drivers
    /// that reach the resulting queue state.
    fn expand(&mut self, node: &Node, inputs: &SlotInputs, out: &mut Vec<Child>) -> Result<()> {
        out.clear();
        let (model, grid) = (self.model, self.grid);
        let cp = &model.compute;
        let harvest =
            select_source(inputs.solar, inputs.wind, node.energy, model.offpeak_threshold_j, &model.battery).selected;
        let load = inputs.total_load();
        let n_rates = grid.rate_levels.len();
        let mut emergency_listed = false;

        for (si, &sigma) in grid.sigma_options.iter().enumerate() {
            let free = if sigma { cp.input_buffer_bits.saturating_sub(node.q_in) } else { 0 };
            let admission = admit(inputs.load_a, inputs.load_b, model.sensitive_fraction, free)?;
            let need = node.q_in + admission.gamma_star;
            let total_out = node.q_out + need;
            let Some((di, drivers)) = self.pick_drivers(total_out) else { continue };
            let dequeued = total_out.min(drivers as u64 * cp.driver_capacity_bits);
            let laser = cp.driver_energy_j_per_s * dequeued as f64 / model.radio.target_rate_bps;
            let comm_key = (sigma, admission.gamma_star, load);
            if !self.comm.contains_key(&comm_key) {
                let levels = grid
                    .zeta_levels
                    .iter()
                    .map(|&z| comm_energy(sigma, z, admission.gamma_star, load as f64, &model.radio, cp.slot_s))
                    .collect::<Result<Vec<_>>>()?;
                self.comm.insert(comm_key, levels);
            }
            let comm = &self.comm[&comm_key];

            for (ci, &containers) in grid.container_counts.iter().enumerate() {
                let mut link = None;
                for (fi, &rate) in grid.rate_levels.iter().enumerate() {
                    if (containers as u64) * self.capacity[fi] < need {
                        continue;
                    }
                    let link = *link.get_or_insert_with(|| {
                        *self.links.entry((need, containers)).or_insert_with(|| Self::link_energy(cp, need, containers))
                    });
                    let Some(link) = link else { break };
                    let cpu = self.cpu_j[ci][fi];
                    let sw = sw_energy(&node.f_prev, &self.rates[ci][fi], cp.switching_cost_j);

                    // Same summation order as the itemized breakdown.
                    let mut best: Option<(f64, usize, usize)> = None;
                    for (ni, &of) in self.offload_j.iter().enumerate() {
                        let comp = cpu + sw + of + link + laser + self.cache_j;
                        for (zi, &zeta) in grid.zeta_levels.iter().enumerate() {
                            let site = comm[zi] + comp;
                            let better = match best {
                                None => true,
                                Some((b, bz, bn)) => {
                                    let bzeta = grid.zeta_levels[bz];
                                    site < b || (site == b && (zeta < bzeta || (zeta == bzeta && (zi, ni) < (bz, bn))))
                                }
                            };
                            if better {
                                best = Some((site, zi, ni));
                            }
                        }
                    }
                    let Some((site, zi, ni)) = best else { continue };
                    if site + model.reserve_j > node.energy {
                        continue;
                    }
                    let energy = step_unchecked(node.energy, harvest, site, &model.battery);
                    if energy < model.battery.low_j {
                        continue;
                    }
                    let setting = Setting {
                        sigma,
                        zeta: grid.zeta_levels[zi],
                        containers,
                        rate,
                        drivers,
                        delta_nic: grid.nic_options[ni],
                    };
                    emergency_listed |= setting == self.emergency;
                    out.push(Child {
                        setting,
                        index: self.index(si, zi, ci, fi, di, ni),
                        bucket: ci * n_rates + fi,
                        site_energy: site,
                        slot_cost: cost_j(site, &admission, model),
                        energy,
                        q_in: 0,
                        q_out: total_out - dequeued,
                    });
                }
            }
        }

        if !emergency_listed {
            let state = node.state();
            let s = self.emergency;
            let outcome = transition(&state, &s, inputs, model)?;
            if admissible(&state, &s, &outcome, true, model) || out.is_empty() {
                out.push(Child {
                    setting: s,
                    index: grid.index_of(&s).unwrap_or(grid.len()),
                    bucket: self.emergency_bucket,
                    site_energy: outcome.realized.energy.site,
                    slot_cost: outcome.cost,
                    energy: outcome.next.energy,
                    q_in: outcome.next.q_in,
                    q_out: outcome.next.q_out,
                });
            }
        }
        Ok(())
    }

    /// Fewest drivers that empty the output buffer, or all of them if the
    /// buffer can hold the rest.
    fn pick_drivers(&self, total_out: u64) -> Option<(usize, usize)> {
        let cp = &self.model.compute;
        let draining = self
            .grid
            .driver_counts
            .iter()
            .enumerate()
            .filter(|(_, &d)| d as u64 * cp.driver_capacity_bits >= total_out)
            .min_by_key(|(i, &d)| (d, *i));
        if let Some((i, &d)) = draining {
            return Some((i, d));
        }
        let (i, _) = self.grid.driver_counts.iter().enumerate().find(|(_, &d)| d == cp.max_drivers)?;
        let drain = cp.max_drivers as u64 * cp.driver_capacity_bits;
        (total_out - drain <= cp.output_buffer_bits).then_some((i, cp.max_drivers))
    }

    fn index(&self, si: usize, zi: usize, ci: usize, fi: usize, di: usize, ni: usize) -> usize {
        let g = self.grid;
        ((((si * g.zeta_levels.len() + zi) * g.container_counts.len() + ci) * g.rate_levels.len() + fi)
            * g.driver_counts.len()
            + di)
            * g.nic_options.len()
            + ni
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    child: Child,
    cost: f64,
    rank: usize,
}

impl Entry {
    /// `self` makes `other` redundant: at least as much energy, and lower
    /// cost or equal cost with a preferred first setting.
    fn dominates(&self, other: &Entry) -> bool {
        self.child.energy >= other.child.energy
            && (self.cost < other.cost || (self.cost == other.cost && self.rank <= other.rank))
    }

    fn node(&self) -> Node {
        Node {
            energy: self.child.energy,
            q_in: self.child.q_in,
            q_out: self.child.q_out,
            f_prev: vec![self.child.setting.rate; self.child.setting.containers],
        }
    }
}

/// Non-dominated branches of one search depth, grouped by successor state.
struct Layer {
    /// Per (containers, rate) bucket: (battery class, input, output backlog)
    /// and the branches reaching it.
    buckets: Vec<Vec<((bool, u64, u64), Vec<Entry>)>>,
}

impl Layer {
    fn new(buckets: usize) -> Self {
        Layer { buckets: vec![Vec::new(); buckets] }
    }

    fn insert(&mut self, entry: Entry, low_j: f64) {
        let c = &entry.child;
        let key = (c.energy < low_j, c.q_in, c.q_out);
        let groups = &mut self.buckets[c.bucket];
        let front = match groups.iter().position(|(k, _)| *k == key) {
            Some(i) => &mut groups[i].1,
            None => {
                groups.push((key, Vec::new()));
                &mut groups.last_mut().expect("just pushed").1
            }
        };
        if front.iter().any(|e| e.dominates(&entry)) {
            return;
        }
        front.retain(|e| !entry.dominates(e));
        front.push(entry);
    }

    fn entries(&self) -> impl Iterator<Item = &Entry> {
        self.buckets.iter().flatten().flat_map(|(_, front)| front.iter())
    }
}

/// Limited-lookahead controller: returns the first setting of the cheapest
/// forecast sequence over the window.
///
/// Branches reaching the same queues and container rates with the same
/// battery class are compared directly; one is dropped when another has at
/// least as much stored energy and a lower accumulated cost (ties go to the
/// preferred first setting). Branches that cannot undercut a known complete
/// sequence are dropped too. The result equals the exhaustive search.
pub fn drc_rs(state: &SiteState, window: &[SlotInputs], grid: &ControlGrid, model: &SiteModel) -> Result<Decision> {
    if window.is_empty() {
        return Err(Error::Domain("lookahead horizon must be at least 1".into()));
    }
    let mut expander = Expander::new(grid, model)?;
    let low_j = model.battery.low_j;
    let root = Node {
        energy: state.energy,
        q_in: state.q_in,
        q_out: state.q_out,
        f_prev: state.f_prev.clone(),
    };
    let mut children = Vec::new();
    expander.expand(&root, &window[0], &mut children)?;
    children.sort_by(|a, b| {
        cmp_tie(&tie_key(&a.setting, a.site_energy, a.index), &tie_key(&b.setting, b.site_energy, b.index))
    });
    let roots: Vec<Setting> = children.iter().map(|c| c.setting).collect();
    let floors = window.iter().map(|w| expander.cost_floor(w)).collect::<Result<Vec<_>>>()?;
    // Cost a branch at depth k must add before the end of the window,
    // accumulated in the same order as the branch costs themselves.
    let reachable = |cost: f64, depth: usize| floors[depth..].iter().fold(cost, |acc, f| acc + f);

    let mut layer = Layer::new(expander.buckets());
    for (rank, c) in children.iter().enumerate() {
        layer.insert(Entry { child: *c, cost: c.slot_cost, rank }, low_j);
    }
    let mut bound = dive(&mut expander, &layer, window)?;
    for (k, inputs) in window.iter().enumerate().skip(1) {
        let last = k + 1 == window.len();
        let mut next = Layer::new(expander.buckets());
        for entry in layer.entries() {
            if reachable(entry.cost, k) > bound.0 {
                continue;
            }
            expander.expand(&entry.node(), inputs, &mut children)?;
            for c in &children {
                let e = Entry { child: *c, cost: entry.cost + c.slot_cost, rank: entry.rank };
                if last {
                    if e.cost < bound.0 || (e.cost == bound.0 && e.rank < bound.1) {
                        bound = (e.cost, e.rank);
                    }
                } else if reachable(e.cost, k + 1) <= bound.0 {
                    next.insert(e, low_j);
                }
            }
        }
        layer = next;
    }
    if window.len() == 1 {
        for e in layer.entries() {
            if e.cost < bound.0 || (e.cost == bound.0 && e.rank < bound.1) {
                bound = (e.cost, e.rank);
            }
        }
    }

    let (expected_cost, rank) = bound;
    let setting = *roots.get(rank).ok_or_else(|| Error::Domain("lookahead produced no sequence".into()))?;
    Ok(Decision { setting, expected_cost, emergency: setting == grid.emergency(&model.compute) })
}

/// Cost and first-setting rank of one complete sequence, found by following
/// the cheapest child from the cheapest first step.
fn dive(expander: &mut Expander, layer: &Layer, window: &[SlotInputs]) -> Result<(f64, usize)> {
    let cheapest = |entries: &mut dyn Iterator<Item = Entry>| {
        entries.min_by(|a, b| a.cost.total_cmp(&b.cost).then(a.rank.cmp(&b.rank)))
    };
    let Some(mut at) = cheapest(&mut layer.entries().copied()) else { return Ok((f64::INFINITY, usize::MAX)) };
    let mut children = Vec::new();
    for inputs in &window[1..] {
        expander.expand(&at.node(), inputs, &mut children)?;
        let next = cheapest(&mut children.iter().map(|c| Entry { child: *c, cost: at.cost + c.slot_cost, rank: at.rank }));
        at = next.expect("every node has at least the emergency child");
    }
    Ok((at.cost, at.rank))
}

/// Reference search over every admissible sequence of grid settings.
pub fn exhaustive(state: &SiteState, window: &[SlotInputs], grid: &ControlGrid, model: &SiteModel) -> Result<Decision> {
    if window.is_empty() {
        return Err(Error::Domain("lookahead horizon must be at least 1".into()));
    }
    let mut best: Option<(f64, (f64, usize, usize, f64, usize), Setting, bool)> = None;
    for cand in enumerate_controls(state, grid, &window[0], model)? {
        let leaf = descend(&cand.outcome.next, 1, cand.outcome.cost, window, grid, model)?;
        let key = cand.tie_key();
        let better = match &best {
            None => true,
            Some((bc, bk, _, _)) => leaf < *bc || (leaf == *bc && cmp_tie(&key, bk) == Ordering::Less),
        };
        if better {
            best = Some((leaf, key, cand.setting, cand.emergency));
        }
    }
    let (expected_cost, _, setting, emergency) =
        best.ok_or_else(|| Error::Domain("no candidate setting".into()))?;
    Ok(Decision { setting, expected_cost, emergency })
}

fn descend(
    state: &SiteState,
    depth: usize,
    cost: f64,
    window: &[SlotInputs],
    grid: &ControlGrid,
    model: &SiteModel,
) -> Result<f64> {
    if depth == window.len() {
        return Ok(cost);
    }
    let mut best = f64::INFINITY;
    for cand in enumerate_controls(state, grid, &window[depth], model)? {
        best = best.min(descend(&cand.outcome.next, depth + 1, cost + cand.outcome.cost, window, grid, model)?);
    }
    Ok(best)
}
