use super::{ComputeParams, ControlInput, EnergyBreakdown, NicFormula, RadioParams};
use crate::error::{Error, Result};

/// Load-dependent radio energy of serving `load_bits` with bandwidth
/// fraction `zeta`.
pub fn load_power(load_bits: f64, zeta: f64, p: &RadioParams) -> Result<f64> {
    if !(zeta > 0.0 && zeta <= 1.0) {
        return Err(Error::Domain(format!("bandwidth fraction {zeta} outside (0, 1]")));
    }
    let spectral = 2f64.powf(p.target_rate_bps / (zeta * p.bandwidth_hz)) - 1.0;
    Ok(load_bits * spectral * p.noise_density_w_per_hz * p.inter_site_distance_m.powf(p.path_loss_exponent)
        / p.path_loss_constant)
}

/// Base-station energy for one slot. A base station in power-saving mode
/// neither draws its operating power nor transmits.
pub fn comm_energy(
    sigma: bool,
    zeta: f64,
    gamma_star: u64,
    load_bits: f64,
    p: &RadioParams,
    slot_s: f64,
) -> Result<f64> {
    let active = if sigma { p.bs_operating_power_w * slot_s + load_power(load_bits, zeta, p)? } else { 0.0 };
    Ok(active + p.backhaul_power_w * slot_s + p.data_exchange_j_per_byte * (gamma_star as f64 / 8.0))
}

pub fn cp_energy(rates: &[f64], cp: &ComputeParams) -> Result<f64> {
    let f_max = cp.max_rate_mbps();
    let mut total = 0.0;
    for &f in rates {
        if !cp.is_rate_level(f) {
            return Err(Error::InvalidLevel(f));
        }
        let utilization = if f_max > 0.0 { (f / f_max).powi(2) } else { 0.0 };
        total += cp.container_idle_j + utilization * (cp.container_max_j - cp.container_idle_j);
    }
    Ok(total)
}

/// Reconfiguration energy. Containers created or destroyed between slots
/// count as switching from or to rate 0.
pub fn sw_energy(f_prev: &[f64], f_now: &[f64], switching_cost: f64) -> f64 {
    let n = f_prev.len().max(f_now.len());
    (0..n)
        .map(|c| {
            let a = f_prev.get(c).copied().unwrap_or(0.0);
            let b = f_now.get(c).copied().unwrap_or(0.0);
            switching_cost * (b - a) * (b - a)
        })
        .sum()
}

pub fn offload_energy(delta_nic: bool, cp: &ComputeParams) -> f64 {
    match cp.nic_formula {
        NicFormula::Corrected => {
            if delta_nic {
                cp.nic_max_j
            } else {
                cp.nic_idle_j
            }
        }
        NicFormula::Verbatim => (delta_nic as u8 as f64) * cp.nic_idle_j + cp.nic_max_j,
    }
}

/// Link rates and intra-server communication energy for a task allocation.
///
/// Each link runs at the rate that spreads its task over the slot minus
/// the processing time, clamped into the allowed rate band.
pub fn link_energy(gamma: &[u64], cp: &ComputeParams) -> Result<(Vec<f64>, f64)> {
    let (_, energy) = link_totals(gamma, cp)?;
    Ok((gamma.iter().map(|&g| link_rate(g, cp)).collect(), energy))
}

pub(crate) fn link_rate(gamma: u64, cp: &ComputeParams) -> f64 {
    (2.0 * gamma as f64 / (cp.slot_s - cp.max_processing_time_s)).clamp(cp.min_link_rate_bps, cp.max_link_rate_bps)
}

/// Summed link rate and link energy without materializing per-link rates.
pub(crate) fn link_totals(gamma: &[u64], cp: &ComputeParams) -> Result<(f64, f64)> {
    let window = cp.slot_s - cp.max_processing_time_s;
    let mut total = 0.0;
    let mut energy = 0.0;
    for &g in gamma {
        if g > cp.max_container_load_bits {
            return Err(Error::InfeasibleControl(format!(
                "container task of {g} bits above the {} bit cap",
                cp.max_container_load_bits
            )));
        }
        total += link_rate(g, cp);
        energy += 2.0 * cp.link_power_w / window * (cp.link_rtt_s * g as f64).powi(2);
    }
    if total > cp.max_link_rate_bps {
        return Err(Error::InfeasibleRate { total, max: cp.max_link_rate_bps });
    }
    Ok((total, energy))
}

pub fn laser_energy(l_d: &[u64], driver_energy_j_per_s: f64, target_rate_bps: f64, max_drivers: usize) -> Result<f64> {
    if l_d.len() > max_drivers {
        return Err(Error::InfeasibleControl(format!("{} drivers requested, {max_drivers} available", l_d.len())));
    }
    let bits: u64 = l_d.iter().sum();
    Ok(driver_energy_j_per_s * bits as f64 / target_rate_bps)
}

pub fn cache_energy(response_factor: f64, transmission_j: f64, storage_j: f64) -> f64 {
    response_factor * (transmission_j + storage_j)
}

/// Edge-server side of the slot energy (the `comm` field is zero).
pub fn comp_energy(control: &ControlInput, f_prev: &[f64], cp: &ComputeParams, target_rate_bps: f64) -> Result<EnergyBreakdown> {
    let cpu = cp_energy(&control.rates, cp)?;
    let sw = sw_energy(f_prev, &control.rates, cp.switching_cost_j);
    let of = offload_energy(control.delta_nic, cp);
    let (_, lk) = link_energy(&control.gamma, cp)?;
    let ls = laser_energy(&control.l_d, cp.driver_energy_j_per_s, target_rate_bps, cp.max_drivers)?;
    let ch = cache_energy(cp.cache_response_factor, cp.cache_transmission_j, cp.cache_storage_j);
    Ok(EnergyBreakdown::from_parts(0.0, cpu, sw, of, lk, ls, ch))
}

/// Full itemized site energy for one slot; `load_bits` is the total offered
/// load of both operators.
pub fn site_energy(
    control: &ControlInput,
    f_prev: &[f64],
    load_bits: f64,
    radio: &RadioParams,
    cp: &ComputeParams,
) -> Result<EnergyBreakdown> {
    let comm = comm_energy(control.sigma, control.zeta, control.gamma_star, load_bits, radio, cp.slot_s)?;
    let c = comp_energy(control, f_prev, cp, radio.target_rate_bps)?;
    Ok(EnergyBreakdown::from_parts(comm, c.cp, c.sw, c.of, c.lk, c.ls, c.ch))
}
