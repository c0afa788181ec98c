//! Conventional reference schedulers: round robin in time and frequency,
//! channel-aware admission with round-robin frequency allocation, and a
//! greedy maximizing the ratio of sum data rate to total transmit power.
//! All of them price grants at the minimum power that fits the slot.

use crate::link::SlotLink;
use crate::model::{ChannelRealization, NodeState, ScheduleDecision};

/// Persistent round-robin pointer: the node id the next admission scan
/// starts from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RrState {
    pub next_id: usize,
}

/// Which half of the round-robin scheduler to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RrMode {
    /// Admission only: serve minimum requirements in circular order.
    Time,
    /// Admission plus circular distribution of the remaining units.
    Frequency,
}

/// Decisions plus bookkeeping shared by every baseline.
#[derive(Debug, Clone)]
pub struct BaselineOutcome {
    /// One decision per input node, aligned with the input slice.
    pub decisions: Vec<ScheduleDecision>,
    /// TBS index per node for LTE grants.
    pub deltas: Vec<Option<usize>>,
    /// Grants that could not be priced on the realized channel.
    pub dropped_grants: Vec<usize>,
}

/// Lay out per-node unit counts as consecutive chunk ranges, in the order
/// the nodes were admitted. Contiguity and disjointness hold by
/// construction.
fn layout_contiguous(order: &[usize], counts: &[usize], n_nodes: usize) -> Vec<Vec<usize>> {
    let mut chunks = vec![Vec::new(); n_nodes];
    let mut cursor = 0usize;
    for &i in order {
        if counts[i] == 0 {
            continue;
        }
        chunks[i] = (cursor..cursor + counts[i]).collect();
        cursor += counts[i];
    }
    chunks
}

/// Price the laid-out grants and assemble decisions; grants the realized
/// channel cannot carry are dropped (the node stays backlogged).
fn finalize(
    nodes: &[&NodeState],
    order: &[usize],
    counts: &[usize],
    link: &SlotLink<'_>,
    channel: Option<&ChannelRealization>,
) -> BaselineOutcome {
    let chunks = layout_contiguous(order, counts, nodes.len());
    let mut decisions = vec![ScheduleDecision::idle(); nodes.len()];
    let mut deltas = vec![None; nodes.len()];
    let mut dropped = Vec::new();
    for i in 0..nodes.len() {
        if chunks[i].is_empty() {
            continue;
        }
        match link.grant_min_power(nodes[i], i, &chunks[i], channel) {
            Some(g) => {
                decisions[i] = ScheduleDecision {
                    scheduled: true,
                    chunks: chunks[i].clone(),
                    power_w: g.power_w,
                };
                deltas[i] = g.delta;
            }
            None => dropped.push(i),
        }
    }
    BaselineOutcome {
        decisions,
        deltas,
        dropped_grants: dropped,
    }
}

/// Circular admission order: backlogged nodes sorted by id distance from the
/// round-robin pointer.
fn rr_order(nodes: &[&NodeState], state: &RrState, id_space: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by_key(|&i| (nodes[i].id + id_space - state.next_id % id_space) % id_space);
    order
}

/// Admit nodes at their minimum unit counts until the budget runs out.
fn admit_minimums(
    nodes: &[&NodeState],
    order: &[usize],
    total_units: usize,
    link: &SlotLink<'_>,
) -> (Vec<usize>, Vec<usize>, usize) {
    let mut counts = vec![0usize; nodes.len()];
    let mut admitted = Vec::new();
    let mut used = 0usize;
    for &i in order {
        let Some(need) = link.min_units(nodes[i], total_units) else {
            continue;
        };
        if used + need <= total_units {
            counts[i] = need;
            used += need;
            admitted.push(i);
        }
    }
    (counts, admitted, used)
}

/// Round-robin time-domain admission on its own: backlogged nodes are taken
/// in circular id order while their minimum requirements fit the budget, and
/// the pointer advances past the last admitted node. Returns dense indices
/// in admission order.
pub fn rr_admit(
    nodes: &[&NodeState],
    total_units: usize,
    link: &SlotLink<'_>,
    state: &mut RrState,
    id_space: usize,
) -> Vec<usize> {
    let order = rr_order(nodes, state, id_space);
    let (_, admitted, _) = admit_minimums(nodes, &order, total_units, link);
    if let Some(&last) = admitted.last() {
        state.next_id = (nodes[last].id + 1) % id_space;
    }
    admitted
}

/// Two-sided round robin: admit backlogged nodes in circular id order at
/// their minimum requirement, then (in frequency mode) hand out the
/// remaining units one at a time in the same circular order. The pointer
/// advances past the last admitted node.
pub fn schedule_rr(
    nodes: &[&NodeState],
    total_units: usize,
    mode: RrMode,
    link: &SlotLink<'_>,
    channel: Option<&ChannelRealization>,
    state: &mut RrState,
    id_space: usize,
) -> BaselineOutcome {
    let order = rr_order(nodes, state, id_space);
    let (mut counts, admitted, used) = admit_minimums(nodes, &order, total_units, link);
    if let Some(&last) = admitted.last() {
        state.next_id = (nodes[last].id + 1) % id_space;
    }
    if mode == RrMode::Frequency && !admitted.is_empty() {
        let mut spare = total_units - used;
        let mut idx = 0usize;
        while spare > 0 {
            let i = admitted[idx % admitted.len()];
            counts[i] += 1;
            spare -= 1;
            idx += 1;
        }
    }
    finalize(nodes, &order, &counts, link, channel)
}

/// Channel-aware admission: nodes sorted by descending best-chunk SNR get
/// their minimum requirement first; remaining units go round-robin among the
/// admitted.
pub fn schedule_channel_aware(
    nodes: &[&NodeState],
    total_units: usize,
    link: &SlotLink<'_>,
    channel: &ChannelRealization,
) -> BaselineOutcome {
    let env = link.env;
    let best_snr = |i: usize| -> f64 {
        (0..channel.n_chunks())
            .map(|c| channel.gain(c, i) / (env.noise_psd_w_hz + env.interference_on(c)))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| {
        best_snr(b)
            .total_cmp(&best_snr(a))
            .then(nodes[a].id.cmp(&nodes[b].id))
    });
    let (mut counts, admitted, used) = admit_minimums(nodes, &order, total_units, link);
    if !admitted.is_empty() {
        let mut spare = total_units - used;
        let mut idx = 0usize;
        while spare > 0 {
            let i = admitted[idx % admitted.len()];
            counts[i] += 1;
            spare -= 1;
            idx += 1;
        }
    }
    finalize(nodes, &order, &counts, link, Some(channel))
}

/// One candidate move of the sum-rate-per-power greedy.
#[derive(Debug, Clone, Copy, PartialEq)]
enum GreedyStep {
    Admit { node: usize, units: usize },
    Extend { node: usize },
}

/// Ratio the pool would have after a candidate step; `None` when the step
/// is not priceable.
fn ratio_after(
    nodes: &[&NodeState],
    counts: &[usize],
    link: &SlotLink<'_>,
    sum_rate: f64,
    sum_power: f64,
    step: GreedyStep,
) -> Option<f64> {
    let (node, new_units, old_units) = match step {
        GreedyStep::Admit { node, units } => (node, units, 0),
        GreedyStep::Extend { node } => (node, counts[node] + 1, counts[node]),
    };
    let chunks: Vec<usize> = (0..new_units).collect();
    let new = link.grant_min_power(nodes[node], node, &chunks, None)?;
    let (old_rate, old_power) = if old_units > 0 {
        let chunks: Vec<usize> = (0..old_units).collect();
        let g = link.grant_min_power(nodes[node], node, &chunks, None)?;
        (g.rate_bps, g.power_w)
    } else {
        (0.0, 0.0)
    };
    let rate = sum_rate - old_rate + new.rate_bps;
    let power = sum_power - old_power + new.power_w;
    if power <= 0.0 {
        return None;
    }
    Some(rate / power)
}

/// Greedy maximization of sum data rate over total transmit power: repeat
/// the admission or single-unit extension that most improves the pool ratio
/// until no move improves it. Admissions enter at the node's minimum
/// requirement; powers are minimum-to-fit throughout. Pricing uses average
/// pathloss; the realized channel only enters the final grant pricing.
pub fn schedule_sumrate_per_power(
    nodes: &[&NodeState],
    total_units: usize,
    link: &SlotLink<'_>,
    channel: Option<&ChannelRealization>,
) -> BaselineOutcome {
    let mut counts = vec![0usize; nodes.len()];
    let mut admitted_order: Vec<usize> = Vec::new();
    let mut used = 0usize;
    let mut sum_rate = 0.0;
    let mut sum_power = 0.0;
    let mut current_ratio = 0.0;

    loop {
        let mut best: Option<(f64, GreedyStep)> = None;
        for i in 0..nodes.len() {
            let step = if counts[i] == 0 {
                match link.min_units(nodes[i], total_units) {
                    Some(u) if used + u <= total_units => GreedyStep::Admit { node: i, units: u },
                    _ => continue,
                }
            } else {
                if used + 1 > total_units {
                    continue;
                }
                GreedyStep::Extend { node: i }
            };
            let Some(r) = ratio_after(nodes, &counts, link, sum_rate, sum_power, step) else {
                continue;
            };
            let replace = match best {
                None => true,
                Some((br, _)) => r > br,
            };
            if replace {
                best = Some((r, step));
            }
        }
        let Some((ratio, step)) = best else { break };
        let improves = admitted_order.is_empty() || ratio > current_ratio * (1.0 + 1e-12);
        if !improves {
            break;
        }
        match step {
            GreedyStep::Admit { node, units } => {
                counts[node] = units;
                used += units;
                admitted_order.push(node);
            }
            GreedyStep::Extend { node } => {
                counts[node] += 1;
                used += 1;
            }
        }
        // Re-derive pool totals from scratch to avoid drift.
        sum_rate = 0.0;
        sum_power = 0.0;
        for (i, &cnt) in counts.iter().enumerate() {
            if cnt > 0 {
                let chunks: Vec<usize> = (0..cnt).collect();
                if let Some(g) = link.grant_min_power(nodes[i], i, &chunks, None) {
                    sum_rate += g.rate_bps;
                    sum_power += g.power_w;
                }
            }
        }
        current_ratio = if sum_power > 0.0 {
            sum_rate / sum_power
        } else {
            0.0
        };
    }

    finalize(nodes, &admitted_order, &counts, link, channel)
}
