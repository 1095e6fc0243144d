use serde::{Deserialize, Serialize};

use super::{ComputeParams, ControlInput};

/// Service time charged at each of the two buffers on the queue path.
pub const SERVICE_TIME_S: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub feasible: bool,
    /// Bits the link budget can carry in one slot, halved for the round trip.
    pub link_budget_bits: f64,
    /// Bits all containers at maximum rate process within the processing time.
    pub processing_bits: f64,
    pub detail: String,
}

/// Static feasibility of the reconfiguration problem: the link budget must
/// carry a full input buffer, and the largest configuration must process at
/// least the minimum link rate.
pub fn check_feasibility(cp: &ComputeParams, input_cap: u64) -> Feasibility {
    let window = cp.slot_s - cp.max_processing_time_s;
    let link_budget_bits = if window > 0.0 { cp.max_link_rate_bps / 2.0 * window } else { 0.0 };
    let processing_bits = cp.max_containers as f64 * cp.max_rate_mbps() * 1e6 * cp.max_processing_time_s;
    let link_ok = link_budget_bits >= input_cap as f64 && window > 0.0;
    let proc_ok = processing_bits >= cp.min_link_rate_bps;
    let detail = match (link_ok, proc_ok) {
        (true, true) => "feasible".to_string(),
        (false, _) => format!("link budget {link_budget_bits} bits below input capacity {input_cap} bits"),
        (true, false) => {
            format!("peak processing {processing_bits} bits below minimum link rate {}", cp.min_link_rate_bps)
        }
    };
    Feasibility { feasible: link_ok && proc_ok, link_budget_bits, processing_bits, detail }
}

/// Upper bound on the end-to-end queueing delay through both buffers.
pub fn delay_bound(input_cap: u64, output_cap: u64, min_link_rate_bps: f64) -> f64 {
    (input_cap + output_cap) as f64 / min_link_rate_bps + 2.0 * SERVICE_TIME_S
}

/// Queueing delay seen by a bit entering behind the given backlogs.
pub fn path_delay(q_in: u64, q_out: u64, min_link_rate_bps: f64) -> f64 {
    q_in as f64 / min_link_rate_bps + q_out as f64 / min_link_rate_bps + 2.0 * SERVICE_TIME_S
}

/// Worst per-container transfer-plus-processing time of a control.
pub fn slot_delay(control: &ControlInput, cp: &ComputeParams) -> f64 {
    control
        .gamma
        .iter()
        .zip(&control.link_rates)
        .map(|(&g, &r)| 2.0 * g as f64 / r)
        .fold(0.0, f64::max)
        + cp.max_processing_time_s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn control(gamma: Vec<u64>, link_rates: Vec<f64>) -> ControlInput {
        ControlInput {
            zeta: 1.0,
            sigma: true,
            rates: vec![50.0; gamma.len()],
            gamma_star: gamma.iter().sum(),
            gamma,
            link_rates,
            delta_nic: false,
            drivers: 0,
            l_d: vec![],
        }
    }

    #[test]
    fn default_site_is_feasible() {
        let cp = ComputeParams::default();
        let f = check_feasibility(&cp, 100_000_000);
        assert!(f.feasible, "{}", f.detail);
        assert_eq!(f.link_budget_bits, 5e7 * 1799.2);
        assert_eq!(f.processing_bits, 20.0 * 105e6 * 0.8);
    }

    #[test]
    fn degenerate_sites_are_infeasible() {
        let cp = ComputeParams { max_link_rate_bps: 0.0, ..ComputeParams::default() };
        assert!(!check_feasibility(&cp, 100_000_000).feasible);
        let cp = ComputeParams { max_processing_time_s: 1800.0, ..ComputeParams::default() };
        assert!(!check_feasibility(&cp, 1).feasible);
    }

    #[test]
    fn delay_bound_examples() {
        assert_eq!(delay_bound(100_000_000, 100_000_000, 1e6), 202.0);
        assert_eq!(delay_bound(0, 0, 1e6), 2.0);
        assert_eq!(delay_bound(200_000_000, 200_000_000, 1e6) - 2.0, 2.0 * 200.0);
        assert_eq!(path_delay(100_000_000, 100_000_000, 1e6), 202.0);
    }

    #[test]
    fn slot_delay_examples() {
        let cp = ComputeParams::default();
        assert_eq!(slot_delay(&control(vec![0, 0], vec![1e6, 1e6]), &cp), 0.8);
        let r = 1e6;
        let g = (r * (cp.slot_s - cp.max_processing_time_s) / 2.0) as u64;
        assert!((slot_delay(&control(vec![g], vec![r]), &cp) - cp.slot_s).abs() < 1e-9);
        let d = slot_delay(&control(vec![1_000_000, 3_000_000], vec![2e6, 4e6]), &cp);
        assert!((d - (1.5 + 0.8)).abs() < 1e-12);
    }
}
