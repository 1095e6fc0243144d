use super::{transition, ControlGrid, Decision, Setting, SiteModel, SlotInputs};
use crate::error::{Error, Result};
use crate::site::{ComputeParams, SiteState};

fn nearest(levels: &[f64], target: f64) -> Option<f64> {
    levels.iter().copied().fold(None, |best: Option<f64>, v| match best {
        Some(b) if (b - target).abs() < (v - target).abs() => Some(b),
        Some(b) if (b - target).abs() == (v - target).abs() && b <= v => Some(b),
        _ => Some(v),
    })
}

fn reserved(fraction: f64, max: usize) -> usize {
    // Guard against products like 0.7 * 20 landing just above an integer.
    ((fraction * max as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Fixed reservation of a fraction of every resource.
pub fn rrm_setting(grid: &ControlGrid, cp: &ComputeParams, fraction: f64) -> Result<Setting> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::config("controller.reservation_fraction", "must lie in (0, 1]"));
    }
    let zeta = nearest(&grid.zeta_levels, fraction).unwrap_or(fraction);
    let rate = nearest(&cp.rate_levels_mbps, fraction * cp.max_rate_mbps()).unwrap_or(0.0);
    Ok(Setting {
        sigma: true,
        zeta,
        containers: reserved(fraction, cp.max_containers).clamp(cp.min_containers, cp.max_containers),
        rate,
        drivers: reserved(fraction, cp.max_drivers),
        delta_nic: true,
    })
}

/// Reservation controller. Forecasts only serve to reject a reservation the
/// stored energy cannot cover while keeping enough for one emergency slot;
/// the emergency setting is used instead.
pub fn rrm(
    state: &SiteState,
    window: &[SlotInputs],
    grid: &ControlGrid,
    model: &SiteModel,
    fraction: f64,
) -> Result<Decision> {
    let first = window.first().ok_or_else(|| Error::Domain("forecast window is empty".into()))?;
    let setting = rrm_setting(grid, &model.compute, fraction)?;
    if let Ok(out) = transition(state, &setting, first, model) {
        if out.realized.energy.site + model.reserve_j <= state.energy {
            return Ok(Decision { setting, expected_cost: out.cost, emergency: false });
        }
    }
    let setting = grid.emergency(&model.compute);
    let out = transition(state, &setting, first, model)?;
    Ok(Decision { setting, expected_cost: out.cost, emergency: true })
}
