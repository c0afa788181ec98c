//! Frequency-domain scheduling with limited feedback: the base station sees
//! only each node's average pathloss, remaining energy, and traffic profile,
//! never a per-chunk channel realization. Chunk counts are grown greedily,
//! one chunk at a time, always to the shortest-lifetime node that still
//! benefits.

use crate::lifetime;
use crate::math::{self, MathError, RateModel};
use crate::model::NodeState;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LimitedFeedbackError {
    #[error("node {node} needs more than {cap} chunks even at P_max")]
    InfeasibleMinimum { node: usize, cap: usize },
    #[error("chunk count must be >= 1")]
    ZeroChunks,
    #[error(transparent)]
    Math(#[from] MathError),
}

/// Radio constants the limited-feedback scheduler is allowed to know.
#[derive(Debug, Clone, Copy)]
pub struct AvgLinkParams {
    /// Noise PSD N_0, W/Hz.
    pub noise_psd_w_hz: f64,
    /// Interference PSD I, W/Hz.
    pub interference_psd_w_hz: f64,
    /// Antenna gain G_tr (linear).
    pub antenna_gain: f64,
    /// Subcarriers per chunk, M.
    pub subcarriers_per_chunk: usize,
    /// Slot length tau, seconds.
    pub slot_len_s: f64,
}

/// Per-node chunk counts and powers produced by the scheduler.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkCountAllocation {
    /// Chunks granted per node (0 = not scheduled this slot).
    pub counts: Vec<usize>,
    /// Transmit power per node, watts.
    pub powers: Vec<f64>,
    /// Nodes deferred to a later slot because the budget could not cover
    /// their minimum requirement.
    pub deferred: Vec<usize>,
}

/// Average SNR per watt of transmit power at `y` chunks:
/// `G / (y M gamma (N_0 + I) w)`.
fn avg_snr_per_watt(node: &NodeState, y: usize, p: &AvgLinkParams, model: &RateModel) -> f64 {
    p.antenna_gain
        / (y as f64
            * p.subcarriers_per_chunk as f64
            * node.pathloss_linear
            * (p.noise_psd_w_hz + p.interference_psd_w_hz)
            * model.subcarrier_bw_hz)
}

/// Rate over `y` chunks at transmit power `p_w`, using the average-pathloss
/// SNR: `y M S_v(P G / (y M gamma (N_0+I) w))`.
pub fn rate_avg(
    y: usize,
    p_w: f64,
    node: &NodeState,
    params: &AvgLinkParams,
    model: &RateModel,
) -> Result<f64, LimitedFeedbackError> {
    if y == 0 {
        return Err(LimitedFeedbackError::ZeroChunks);
    }
    let eta = p_w * avg_snr_per_watt(node, y, params, model);
    Ok(y as f64 * params.subcarriers_per_chunk as f64 * math::rate_for_snr(eta, model))
}

/// Minimum power that fits the report into the slot at `y` chunks.
pub fn min_power_avg(
    y: usize,
    node: &NodeState,
    params: &AvgLinkParams,
    model: &RateModel,
) -> Result<f64, LimitedFeedbackError> {
    if y == 0 {
        return Err(LimitedFeedbackError::ZeroChunks);
    }
    let load = node.traffic.total_bits()
        / (params.slot_len_s * y as f64 * params.subcarriers_per_chunk as f64);
    Ok(math::snr_for_rate(load, model) / avg_snr_per_watt(node, y, params, model))
}

/// Energy-optimal power at `y` chunks under the average-pathloss SNR,
/// clamped into `[P_min, P_max]`. Same closed form as the full-CSI
/// scheduler, with the average SNR-per-watt in place of the realized one.
pub fn optimal_power_avg(
    y: usize,
    node: &NodeState,
    params: &AvgLinkParams,
    model: &RateModel,
) -> Result<f64, LimitedFeedbackError> {
    if y == 0 {
        return Err(LimitedFeedbackError::ZeroChunks);
    }
    let k = avg_snr_per_watt(node, y, params, model);
    let p_min = min_power_avg(y, node, params, model)?;
    let gamma = model.gamma_mcs;
    let a = k * node.energy.circuit_power_w / (node.energy.pa_inefficiency * gamma) - 1.0;
    let unconstrained = if a.abs() < 1e-12 {
        (gamma / k) * (std::f64::consts::E - 1.0)
    } else {
        let lw = math::lambert_w(a / std::f64::consts::E)?;
        if lw == 0.0 {
            (gamma / k) * (std::f64::consts::E - 1.0)
        } else {
            (gamma / k) * (a / lw - 1.0)
        }
    };
    Ok(unconstrained.max(p_min).min(node.energy.max_power_w))
}

/// Smallest chunk count whose rate at P_max covers `D / tau`, capped at the
/// grid size.
pub fn min_chunks(
    node: &NodeState,
    params: &AvgLinkParams,
    model: &RateModel,
    cap: usize,
) -> Result<usize, LimitedFeedbackError> {
    let need = node.traffic.total_bits() / params.slot_len_s;
    for y in 1..=cap {
        let r = rate_avg(y, node.energy.max_power_w, node, params, model)?;
        if r >= need {
            return Ok(y);
        }
    }
    Err(LimitedFeedbackError::InfeasibleMinimum { node: node.id, cap })
}

/// Expected lifetime at `y` chunks with the optimized power: the selection
/// metric of the greedy loop.
pub fn metric_lifetime(
    y: usize,
    node: &NodeState,
    params: &AvgLinkParams,
    model: &RateModel,
) -> Result<f64, LimitedFeedbackError> {
    let p = optimal_power_avg(y, node, params, model)?;
    let r = rate_avg(y, p, node, params, model)?;
    let e_d = node.traffic.total_bits()
        * (node.energy.circuit_power_w + node.energy.pa_inefficiency * p)
        / r;
    Ok(lifetime::expected_lifetime(&node.energy, &node.traffic, e_d).unwrap_or(0.0))
}

/// Limited-feedback scheduling of `total_chunks` chunks.
///
/// Every admitted node starts at its minimum chunk count; spare chunks then
/// go one at a time to the shortest-lifetime node whose lifetime the extra
/// chunk still improves. Nodes that stop improving retire from the loop.
/// When even the minima do not fit, nodes are admitted by ascending current
/// lifetime and the rest deferred.
pub fn schedule_limited_feedback(
    nodes: &[&NodeState],
    total_chunks: usize,
    params: &AvgLinkParams,
    model: &RateModel,
) -> Result<ChunkCountAllocation, LimitedFeedbackError> {
    let n = nodes.len();
    let mut counts = vec![0usize; n];
    let mut powers = vec![0.0; n];
    let mut deferred = Vec::new();

    // Minimum requirements; individually unservable nodes defer immediately.
    let mut minima = vec![0usize; n];
    let mut admissible = Vec::new();
    for i in 0..n {
        match min_chunks(nodes[i], params, model, total_chunks) {
            Ok(y) => {
                minima[i] = y;
                admissible.push(i);
            }
            Err(LimitedFeedbackError::InfeasibleMinimum { .. }) => deferred.push(i),
            Err(e) => return Err(e),
        }
    }

    // Admission by ascending lifetime at the minimum allocation.
    let mut scored: Vec<(f64, usize)> = admissible
        .iter()
        .map(|&i| {
            let f = metric_lifetime(minima[i], nodes[i], params, model).unwrap_or(0.0);
            (f, i)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(nodes[a.1].id.cmp(&nodes[b.1].id)));
    let mut admitted = Vec::new();
    let mut used = 0usize;
    for (_, i) in &scored {
        if used + minima[*i] <= total_chunks {
            used += minima[*i];
            admitted.push(*i);
        } else {
            deferred.push(*i);
        }
    }
    admitted.sort_unstable();
    deferred.sort_unstable();

    let mut f = vec![f64::INFINITY; n];
    for &i in &admitted {
        counts[i] = minima[i];
        f[i] = metric_lifetime(counts[i], nodes[i], params, model)?;
    }

    // Greedy spare distribution.
    let mut spare = total_chunks - used;
    let mut active: Vec<usize> = admitted.clone();
    while spare > 0 && !active.is_empty() {
        let m = *active
            .iter()
            .min_by(|&&a, &&b| f[a].total_cmp(&f[b]).then(nodes[a].id.cmp(&nodes[b].id)))
            .unwrap();
        let candidate = metric_lifetime(counts[m] + 1, nodes[m], params, model)?;
        if candidate > f[m] {
            counts[m] += 1;
            f[m] = candidate;
            spare -= 1;
        } else {
            active.retain(|&x| x != m);
            f[m] = f64::INFINITY;
        }
    }

    for &i in &admitted {
        powers[i] = optimal_power_avg(counts[i], nodes[i], params, model)?;
    }
    Ok(ChunkCountAllocation {
        counts,
        powers,
        deferred,
    })
}
