use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::split_workload;

/// Delay-sensitive workload admitted into the input buffer for one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admission {
    pub gamma_star: u64,
    pub share_a: u64,
    pub share_b: u64,
    /// Sensitive load offered before capping.
    pub offered_sensitive: u64,
}

/// Splits each operator's load, then caps the sensitive total at the
/// input-buffer capacity, scaling the operator shares proportionally.
pub fn admit(load_a: u64, load_b: u64, sensitive_fraction: f64, input_cap: u64) -> Result<Admission> {
    let a = split_workload(load_a, sensitive_fraction)?.delay_sensitive;
    let b = split_workload(load_b, sensitive_fraction)?.delay_sensitive;
    let offered = a + b;
    if offered <= input_cap {
        return Ok(Admission { gamma_star: offered, share_a: a, share_b: b, offered_sensitive: offered });
    }
    let share_a = ((input_cap as u128 * a as u128 + offered as u128 / 2) / offered as u128) as u64;
    Ok(Admission { gamma_star: input_cap, share_a, share_b: input_cap - share_a, offered_sensitive: offered })
}

/// Advances the input and output backlogs by one slot.
///
/// Any clipping at a buffer capacity means traffic was lost, which a
/// feasible control must never cause.
pub fn queue_step(
    q_in: u64,
    q_out: u64,
    gamma_star: u64,
    processed: u64,
    dequeued: u64,
    input_cap: u64,
    output_cap: u64,
) -> Result<(u64, u64)> {
    let pending = q_in + gamma_star;
    if processed > pending {
        return Err(Error::InfeasibleControl(format!("processing {processed} bits with only {pending} queued")));
    }
    let staged = q_out + processed;
    if dequeued > staged {
        return Err(Error::InfeasibleControl(format!("dequeuing {dequeued} bits with only {staged} buffered")));
    }
    let next_in = pending - processed;
    let next_out = staged - dequeued;
    if next_in > input_cap {
        return Err(Error::BufferOverflow { buffer: "input", backlog: next_in, cap: input_cap });
    }
    if next_out > output_cap {
        return Err(Error::BufferOverflow { buffer: "output", backlog: next_out, cap: output_cap });
    }
    Ok((next_in, next_out))
}
