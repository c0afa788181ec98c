//! Link-model abstraction used by the reference schedulers and the
//! simulator: a grant is evaluated either on the Shannon-style SC-FDMA rate
//! model (optionally with per-chunk channel state) or on the LTE
//! TBS/open-loop-power rule.

use crate::lte::{self, LtePowerParams, TbsTable};
use crate::math::RateModel;
use crate::model::{ChannelRealization, NodeState, RadioEnvironment};
use crate::scfdma;

/// Which rate/power model a grant is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    Shannon,
    Lte,
}

/// Everything needed to price a grant on either link.
pub struct SlotLink<'a> {
    pub kind: LinkKind,
    pub env: &'a RadioEnvironment,
    pub model: &'a RateModel,
    pub lte_params: &'a LtePowerParams,
    pub tbs: &'a TbsTable,
}

/// A priced grant: power, service rate, airtime, and transmit energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrantInfo {
    pub power_w: f64,
    pub rate_bps: f64,
    pub airtime_s: f64,
    pub tx_energy_j: f64,
    /// TBS index for LTE grants.
    pub delta: Option<usize>,
}

impl SlotLink<'_> {
    /// Flat single-node channel realization at the node's average gain, for
    /// pricing grants without channel state.
    fn flat_single(&self, node: &NodeState, n_chunks: usize) -> ChannelRealization {
        ChannelRealization::flat(n_chunks, &[node.avg_gain()])
    }

    /// Minimum number of resource units (chunks / PRBPs) the node needs,
    /// judged on average pathloss. None when it cannot fit at all.
    pub fn min_units(&self, node: &NodeState, cap: usize) -> Option<usize> {
        match self.kind {
            LinkKind::Shannon => {
                let ch = self.flat_single(node, cap);
                (1..=cap).find(|&y| {
                    let chunks: Vec<usize> = (0..y).collect();
                    scfdma::min_power(node, 0, &chunks, &ch, self.env, self.model)
                        .map(|p| p <= node.energy.max_power_w * (1.0 + 1e-12))
                        .unwrap_or(false)
                })
            }
            LinkKind::Lte => match lte::min_prbp(node, self.lte_params, self.tbs) {
                Ok(n) if n <= cap => Some(n),
                _ => None,
            },
        }
    }

    /// Price a grant of the given chunks at the minimum power that fits the
    /// report in the slot ("conventional" baseline powers). None when the
    /// realized channel cannot carry the report within the power cap.
    pub fn grant_min_power(
        &self,
        node: &NodeState,
        node_dense: usize,
        chunks: &[usize],
        channel: Option<&ChannelRealization>,
    ) -> Option<GrantInfo> {
        if chunks.is_empty() {
            return None;
        }
        match self.kind {
            LinkKind::Shannon => {
                let flat;
                let (ch, dense) = match channel {
                    Some(ch) => (ch, node_dense),
                    None => {
                        flat = self.flat_single(node, chunks.iter().max().copied().unwrap_or(0) + 1);
                        (&flat, 0)
                    }
                };
                let (power, rate) = {
                    let p = scfdma::min_power(node, dense, chunks, ch, self.env, self.model).ok()?;
                    let k = scfdma::snr_per_watt(dense, chunks, ch, self.env).ok()?;
                    (p, scfdma::rate_bps(p, chunks.len(), k, self.env, self.model))
                };
                if power > node.energy.max_power_w * (1.0 + 1e-9) {
                    return None;
                }
                let airtime = node.traffic.total_bits() / rate;
                if airtime > self.env.slot_len_s * (1.0 + 1e-9) {
                    return None;
                }
                Some(GrantInfo {
                    power_w: power,
                    rate_bps: rate,
                    airtime_s: airtime,
                    tx_energy_j: airtime
                        * (node.energy.circuit_power_w + node.energy.pa_inefficiency * power),
                    delta: None,
                })
            }
            LinkKind::Lte => self.lte_grant(node, chunks.len()),
        }
    }

    /// Price an LTE grant of `n_prb` PRBPs with the minimal fitting TBS
    /// index.
    pub fn lte_grant(&self, node: &NodeState, n_prb: usize) -> Option<GrantInfo> {
        let delta = lte::fun_d(n_prb, node.traffic.total_bits(), self.tbs).ok()?;
        let power = lte::powc(n_prb, delta, node.pathloss_linear, self.lte_params, self.tbs).ok()?;
        if power > node.energy.max_power_w * (1.0 + 1e-9) {
            return None;
        }
        let tti = self.lte_params.tti_s;
        Some(GrantInfo {
            power_w: power,
            rate_bps: node.traffic.total_bits() / tti,
            airtime_s: tti,
            tx_energy_j: tti
                * (node.energy.circuit_power_w + node.energy.pa_inefficiency * power),
            delta: Some(delta),
        })
    }

    /// Expected per-report transmission energy at the minimum unit count
    /// with optimized power, on the average (pathloss-only) channel. The
    /// stand-in for the energy an unscheduled node will eventually spend.
    pub fn expected_report_energy(&self, node: &NodeState, cap: usize) -> f64 {
        let fallback = self.env.slot_len_s
            * (node.energy.circuit_power_w
                + node.energy.pa_inefficiency * node.energy.max_power_w);
        match self.kind {
            LinkKind::Shannon => {
                let Some(y) = self.min_units(node, cap) else {
                    return fallback;
                };
                let ch = self.flat_single(node, cap);
                let chunks: Vec<usize> = (0..y).collect();
                scfdma::optimal_slot_energy(node, 0, &chunks, &ch, self.env, self.model)
                    .unwrap_or(fallback)
            }
            LinkKind::Lte => match self.min_units(node, cap) {
                Some(n) => self
                    .lte_grant(node, n)
                    .map(|g| g.tx_energy_j)
                    .unwrap_or(fallback),
                None => fallback,
            },
        }
    }
}
