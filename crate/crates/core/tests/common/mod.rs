#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use remote_site::controller::{ControlGrid, CostWeights, F2Reference, SiteModel, SlotInputs};
use remote_site::site::{ComputeParams, ControlInput, NicFormula, RadioParams, SiteState};

/// Slot energy written out as one expression, straight from the model
/// definitions, without going through the library's itemized helpers.
pub fn reference_site_energy(c: &ControlInput, f_prev: &[f64], load: f64, r: &RadioParams, p: &ComputeParams) -> f64 {
    let f_max = p.rate_levels_mbps.iter().cloned().fold(0.0, f64::max);
    let window = p.slot_s - p.max_processing_time_s;
    let sigma = if c.sigma { 1.0 } else { 0.0 };
    let delta = if c.delta_nic { 1.0 } else { 0.0 };
    sigma * (r.bs_operating_power_w * p.slot_s
        + load * (2f64.powf(r.target_rate_bps / (c.zeta * r.bandwidth_hz)) - 1.0) * r.noise_density_w_per_hz
            * r.inter_site_distance_m.powf(r.path_loss_exponent)
            / r.path_loss_constant)
        + r.backhaul_power_w * p.slot_s
        + r.data_exchange_j_per_byte * c.gamma_star as f64 / 8.0
        + c.rates.iter().map(|f| p.container_idle_j + (p.container_max_j - p.container_idle_j) * (f / f_max) * (f / f_max)).sum::<f64>()
        + (0..c.rates.len().max(f_prev.len()))
            .map(|i| {
                let d = c.rates.get(i).unwrap_or(&0.0) - f_prev.get(i).unwrap_or(&0.0);
                p.switching_cost_j * d * d
            })
            .sum::<f64>()
        + match p.nic_formula {
            NicFormula::Corrected => delta * p.nic_max_j + (1.0 - delta) * p.nic_idle_j,
            NicFormula::Verbatim => delta * p.nic_idle_j + p.nic_max_j,
        }
        + c.gamma.iter().map(|&g| 2.0 * p.link_power_w / window * (p.link_rtt_s * g as f64).powi(2)).sum::<f64>()
        + c.l_d.iter().map(|&l| p.driver_energy_j_per_s * l as f64 / r.target_rate_bps).sum::<f64>()
        + p.cache_response_factor * (p.cache_transmission_j + p.cache_storage_j)
}

fn subset<T: Copy>(rng: &mut ChaCha8Rng, pool: &[T], max: usize) -> Vec<T> {
    let k = rng.gen_range(1..=max.min(pool.len()));
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    idx.shuffle(rng);
    let mut idx = idx[..k].to_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| pool[i]).collect()
}

/// Small control grid, at most 2·2·3·2·3·2 = 144 settings.
pub fn random_grid(rng: &mut ChaCha8Rng, cp: &ComputeParams) -> ControlGrid {
    let containers: Vec<usize> = (cp.min_containers..=cp.max_containers.min(6)).collect();
    let drivers: Vec<usize> = (0..=cp.max_drivers).collect();
    let mut rate_levels = subset(rng, &cp.rate_levels_mbps, 2);
    // Keep most grids able to serve some load.
    if rate_levels.iter().all(|&f| f == 0.0) && rng.gen_bool(0.8) {
        rate_levels.push(cp.max_rate_mbps());
    }
    ControlGrid {
        sigma_options: if rng.gen_bool(0.8) { vec![false, true] } else { subset(rng, &[false, true], 1) },
        zeta_levels: subset(rng, &[0.3, 0.5, 0.7, 1.0], 2),
        container_counts: subset(rng, &containers, 3),
        rate_levels,
        driver_counts: subset(rng, &drivers, 3),
        nic_options: subset(rng, &[false, true], 2),
    }
}

pub fn random_state(rng: &mut ChaCha8Rng, cp: &ComputeParams) -> SiteState {
    let n = rng.gen_range(cp.min_containers..=4);
    let mut state = SiteState::initial(rng.gen_range(100e3..490e3), cp.min_containers);
    state.f_prev = (0..n).map(|_| *cp.rate_levels_mbps.choose(rng).unwrap()).collect();
    state.q_in = if rng.gen_bool(0.6) { 0 } else { rng.gen_range(0..10_000_000) };
    state.q_out = if rng.gen_bool(0.6) { 0 } else { rng.gen_range(0..40_000_000) };
    state
}

pub fn random_inputs(rng: &mut ChaCha8Rng) -> SlotInputs {
    let load = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.2) { 0 } else { rng.gen_range(0..15_000_000) };
    SlotInputs {
        load_a: load(rng),
        load_b: load(rng),
        solar: if rng.gen_bool(0.4) { 0.0 } else { rng.gen_range(0.0..400e3) },
        wind: rng.gen_range(0.0..300e3),
    }
}

pub fn random_model(rng: &mut ChaCha8Rng) -> SiteModel {
    let upsilon = *[0.0, 0.25, 0.5, 1.0].choose(rng).unwrap();
    let f2 = if rng.gen_bool(0.5) { F2Reference::Offered } else { F2Reference::Capacity };
    SiteModel::new(
        RadioParams::default(),
        ComputeParams::default(),
        Default::default(),
        0.8,
        20e3,
        CostWeights { upsilon },
        f2,
    )
    .unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// A feasible control with heterogeneous container rates, together with the
/// previous rates and the offered load it is evaluated against.
pub fn random_control(rng: &mut ChaCha8Rng, cp: &ComputeParams) -> (ControlInput, Vec<f64>, f64) {
    let levels = &cp.rate_levels_mbps;
    let n = rng.gen_range(cp.min_containers..=cp.max_containers);
    let rates: Vec<f64> = (0..n).map(|_| *levels.choose(rng).unwrap()).collect();
    let gamma: Vec<u64> = rates
        .iter()
        .map(|&f| {
            let cap = cp.container_capacity_bits(f);
            if cap == 0 { 0 } else { rng.gen_range(0..=cap) }
        })
        .collect();
    let (link_rates, _) = remote_site::site::link_energy(&gamma, cp).unwrap();
    let drivers = rng.gen_range(0..=cp.max_drivers);
    let l_d = (0..drivers).map(|_| rng.gen_range(0..=cp.driver_capacity_bits)).collect();
    let f_prev = (0..rng.gen_range(0..=cp.max_containers)).map(|_| *levels.choose(rng).unwrap()).collect();
    let control = ControlInput {
        zeta: rng.gen_range(1..=10) as f64 / 10.0,
        sigma: rng.gen_bool(0.7),
        rates,
        gamma_star: rng.gen_range(0..=cp.input_buffer_bits),
        gamma,
        link_rates,
        delta_nic: rng.gen_bool(0.5),
        drivers,
        l_d,
    };
    (control, f_prev, rng.gen_range(0.0..1.25e8))
}
