//! Expected-lifetime computations for individual nodes and the four
//! network-lifetime reductions (shortest / longest / average / sum-of-logs),
//! plus the Jain fairness index.

use crate::model::{EnergyProfile, NodeState, ScheduleDecision, TrafficProfile};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LifetimeError {
    #[error("per-report energy E_s + E_d must be positive")]
    ZeroEnergyPerReport,
    #[error("rate must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("lifetime vector is empty")]
    EmptyVector,
    #[error("all lifetimes are zero")]
    AllZero,
}

/// Which reduction of individual lifetimes defines the network lifetime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LifetimeDefinition {
    /// Shortest individual lifetime (max-min fairness).
    Sil,
    /// Longest individual lifetime.
    Lil,
    /// Average individual lifetime.
    Ail,
    /// Sum of log-lifetimes (proportional fairness).
    Slil,
}

impl std::fmt::Display for LifetimeDefinition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            LifetimeDefinition::Sil => "sil",
            LifetimeDefinition::Lil => "lil",
            LifetimeDefinition::Ail => "ail",
            LifetimeDefinition::Slil => "slil",
        };
        f.write_str(s)
    }
}

/// Per-node expected lifetimes under one definition tag.
#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeVector {
    pub values: Vec<f64>,
    pub definition: LifetimeDefinition,
}

impl LifetimeVector {
    pub fn new(values: Vec<f64>, definition: LifetimeDefinition) -> Self {
        Self { values, definition }
    }
}

/// Expected lifetime at a regeneration point: `E(t) * T / (E_s + E_d)`,
/// where `E_d` is the per-report transmission energy.
pub fn expected_lifetime(
    energy: &EnergyProfile,
    traffic: &TrafficProfile,
    e_d_j: f64,
) -> Result<f64, LifetimeError> {
    let denom = energy.static_per_report_j + e_d_j;
    if !(denom > 0.0) {
        return Err(LifetimeError::ZeroEnergyPerReport);
    }
    Ok((energy.remaining_j * traffic.period_s / denom).max(0.0))
}

/// Energy to push `bits` through the link at rate `rate_bps` and transmit
/// power `power_w`: `(P_c + xi * P) * D / R`.
pub fn transmission_energy(
    power_w: f64,
    rate_bps: f64,
    bits: f64,
    circuit_power_w: f64,
    pa_inefficiency: f64,
) -> Result<f64, LifetimeError> {
    if !(rate_bps > 0.0) {
        return Err(LifetimeError::NonPositiveRate(rate_bps));
    }
    Ok((circuit_power_w + pa_inefficiency * power_w) * bits / rate_bps)
}

/// Outcome of evaluating a node's lifetime one slot ahead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostSlotLifetime {
    /// Expected lifetime at t + tau, seconds.
    pub lifetime_s: f64,
    /// Remaining energy E(t + tau), joules (clamped at 0).
    pub remaining_j: f64,
    /// True when the slot's consumption exhausted the battery.
    pub drained: bool,
}

/// Lifetime of a node after one slot, under a given grant.
///
/// Scheduled nodes pay the realized transmission energy for the report and
/// that energy also enters the per-report denominator; unscheduled backlogged
/// nodes pay `tau * P_c` idle listening, and the estimate `e_d_est_j` stands
/// in for the energy still to be spent until the report finally goes out.
pub fn post_slot_lifetime(
    node: &NodeState,
    decision: &ScheduleDecision,
    rate_bps: f64,
    slot_len_s: f64,
    e_d_est_j: f64,
) -> Result<PostSlotLifetime, LifetimeError> {
    let energy = &node.energy;
    let traffic = &node.traffic;
    let (numerator, e_d) = if decision.scheduled {
        let tx = transmission_energy(
            decision.power_w,
            rate_bps,
            traffic.total_bits(),
            energy.circuit_power_w,
            energy.pa_inefficiency,
        )?;
        (energy.remaining_j - tx, tx)
    } else {
        let idle = slot_len_s * energy.circuit_power_w;
        (energy.remaining_j - idle - e_d_est_j, e_d_est_j)
    };
    let denom = energy.static_per_report_j + e_d;
    if !(denom > 0.0) {
        return Err(LifetimeError::ZeroEnergyPerReport);
    }
    let remaining = if decision.scheduled {
        numerator
    } else {
        // The e_d_est part of the numerator is an expectation, not yet drawn
        // from the battery.
        energy.remaining_j - slot_len_s * energy.circuit_power_w
    };
    let drained = remaining <= 0.0;
    Ok(PostSlotLifetime {
        lifetime_s: (numerator * traffic.period_s / denom).max(0.0),
        remaining_j: remaining.max(0.0),
        drained,
    })
}

/// Reduce a lifetime vector to the network lifetime under its definition.
///
/// SIL is the minimum, LIL the maximum, AIL the mean; SLIL returns the sum of
/// natural logs and is `-inf` when any lifetime is zero.
pub fn network_lifetime(v: &LifetimeVector) -> Result<f64, LifetimeError> {
    if v.values.is_empty() {
        return Err(LifetimeError::EmptyVector);
    }
    let out = match v.definition {
        LifetimeDefinition::Sil => v.values.iter().cloned().fold(f64::INFINITY, f64::min),
        LifetimeDefinition::Lil => v.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        LifetimeDefinition::Ail => v.values.iter().sum::<f64>() / v.values.len() as f64,
        LifetimeDefinition::Slil => v
            .values
            .iter()
            .map(|&x| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY })
            .sum(),
    };
    Ok(out)
}

/// Jain fairness index `(sum L)^2 / (n * sum L^2)`, in `[1/n, 1]`.
pub fn jain_index(values: &[f64]) -> Result<f64, LifetimeError> {
    if values.is_empty() {
        return Err(LifetimeError::EmptyVector);
    }
    let sum: f64 = values.iter().sum();
    let sumsq: f64 = values.iter().map(|&x| x * x).sum();
    if sumsq == 0.0 {
        return Err(LifetimeError::AllZero);
    }
    Ok(sum * sum / (values.len() as f64 * sumsq))
}
