//! Domain types for machine nodes, radio resources, and channels, plus the
//! pathloss and block-fading channel generation used by the simulator.

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("chunk set is empty")]
    EmptyChunkSet,
    #[error("chunk {chunk} already allocated to node {holder}")]
    ChunkTaken { chunk: usize, holder: usize },
    #[error("chunk index {0} outside grid")]
    ChunkOutOfRange(usize),
}

/// Per-node reporting traffic: one report of `payload_bits` every
/// `period_s` seconds on average, plus protocol overhead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficProfile {
    /// Expected reporting period T_i in seconds.
    pub period_s: f64,
    /// Payload D_i per report, in bits.
    pub payload_bits: f64,
    /// Protocol overhead D_oh per report, in bits.
    pub overhead_bits: f64,
    /// High-priority flag Q_i (deadline-expired traffic).
    pub priority: bool,
}

impl TrafficProfile {
    /// Total bits per report including overhead.
    pub fn total_bits(&self) -> f64 {
        self.payload_bits + self.overhead_bits
    }
}

/// Battery and power-consumption parameters of one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyProfile {
    /// Remaining energy E_i(t) in joules.
    pub remaining_j: f64,
    /// Initial battery capacity in joules.
    pub initial_j: f64,
    /// Static energy E_s per report (sensing, processing), joules.
    pub static_per_report_j: f64,
    /// Circuit power P_c in watts, consumed whenever the radio is active.
    pub circuit_power_w: f64,
    /// Inverse PA efficiency xi (>= 1); transmit-mode power is P_c + xi * P.
    pub pa_inefficiency: f64,
    /// Maximum transmit power P_max in watts.
    pub max_power_w: f64,
}

/// Cell-wide radio parameters shared by all nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioEnvironment {
    /// Noise power spectral density N_0, W/Hz.
    pub noise_psd_w_hz: f64,
    /// Interference PSD I, W/Hz (single-cell default 0).
    pub interference_psd_w_hz: f64,
    /// Optional per-chunk interference PSD overrides I_j.
    pub interference_per_chunk: Option<Vec<f64>>,
    /// Combined transmit/receive antenna gain G_tr (linear).
    pub antenna_gain: f64,
    /// Subcarrier bandwidth w, Hz.
    pub subcarrier_bw_hz: f64,
    /// Subcarriers per chunk, M.
    pub subcarriers_per_chunk: usize,
    /// Slot length tau, seconds.
    pub slot_len_s: f64,
    /// Maximum number of contiguous chunk clusters per node.
    pub max_clusters: usize,
}

impl RadioEnvironment {
    /// Interference PSD on a given chunk.
    pub fn interference_on(&self, chunk: usize) -> f64 {
        match &self.interference_per_chunk {
            Some(v) if chunk < v.len() => v[chunk],
            _ => self.interference_psd_w_hz,
        }
    }

    /// Noise-plus-interference power over one chunk (M subcarriers of w Hz).
    pub fn chunk_noise_w(&self, chunk: usize) -> f64 {
        (self.noise_psd_w_hz + self.interference_on(chunk))
            * self.subcarriers_per_chunk as f64
            * self.subcarrier_bw_hz
    }
}

/// State of one machine device as seen by the schedulers.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub id: usize,
    pub traffic: TrafficProfile,
    pub energy: EnergyProfile,
    /// Distance to the base station, meters.
    pub distance_m: f64,
    /// Average distance-dependent pathloss gamma_i (linear loss, >= 1).
    pub pathloss_linear: f64,
    /// Bits currently queued for uplink transmission.
    pub queue_bits: f64,
    /// True when the head-of-line report has exceeded its delay budget.
    pub deadline_expired: bool,
}

impl NodeState {
    /// Average channel gain (pathloss only), used when no fading realization
    /// is available.
    pub fn avg_gain(&self) -> f64 {
        1.0 / self.pathloss_linear
    }
}

/// Block-fading channel realization: linear gain per (chunk, node), constant
/// within one slot.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    n_chunks: usize,
    n_nodes: usize,
    gains: Vec<f64>,
}

impl ChannelRealization {
    pub fn new(n_chunks: usize, n_nodes: usize, gains: Vec<f64>) -> Self {
        assert_eq!(gains.len(), n_chunks * n_nodes);
        Self {
            n_chunks,
            n_nodes,
            gains,
        }
    }

    /// Flat (no fading) realization from per-node average gains.
    pub fn flat(n_chunks: usize, avg_gains: &[f64]) -> Self {
        let mut gains = Vec::with_capacity(n_chunks * avg_gains.len());
        for _ in 0..n_chunks {
            gains.extend_from_slice(avg_gains);
        }
        Self {
            n_chunks,
            n_nodes: avg_gains.len(),
            gains,
        }
    }

    pub fn n_chunks(&self) -> usize {
        self.n_chunks
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Channel gain h_{ji} of node `node` (dense index) on chunk `chunk`.
    pub fn gain(&self, chunk: usize, node: usize) -> f64 {
        self.gains[chunk * self.n_nodes + node]
    }
}

/// Fading model used when drawing a slot's channel realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FadingModel {
    /// Pathloss only; gains equal the per-node average.
    None,
    /// Block Rayleigh: average gain scaled by an Exp(1) draw per (chunk, node).
    RayleighBlock,
}

/// Uplink grant for one node in one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleDecision {
    /// theta_i: true when the node transmits this slot.
    pub scheduled: bool,
    /// Allocated chunk indices, sorted ascending.
    pub chunks: Vec<usize>,
    /// Transmit power P_i in watts (0 when unscheduled).
    pub power_w: f64,
}

impl ScheduleDecision {
    pub fn idle() -> Self {
        Self {
            scheduled: false,
            chunks: Vec::new(),
            power_w: 0.0,
        }
    }
}

/// The slot's allocatable chunks and their ownership.
#[derive(Debug, Clone)]
pub struct ResourceGrid {
    allocation: Vec<Option<usize>>,
}

impl ResourceGrid {
    pub fn new(n_chunks: usize) -> Self {
        Self {
            allocation: vec![None; n_chunks],
        }
    }

    pub fn n_chunks(&self) -> usize {
        self.allocation.len()
    }

    pub fn holder(&self, chunk: usize) -> Option<usize> {
        self.allocation.get(chunk).copied().flatten()
    }

    pub fn is_free(&self, chunk: usize) -> bool {
        self.holder(chunk).is_none()
    }

    pub fn free_chunks(&self) -> Vec<usize> {
        (0..self.allocation.len())
            .filter(|&c| self.is_free(c))
            .collect()
    }

    pub fn allocate(&mut self, chunk: usize, node: usize) -> Result<(), ModelError> {
        match self.allocation.get(chunk) {
            None => Err(ModelError::ChunkOutOfRange(chunk)),
            Some(Some(holder)) => Err(ModelError::ChunkTaken {
                chunk,
                holder: *holder,
            }),
            Some(None) => {
                self.allocation[chunk] = Some(node);
                Ok(())
            }
        }
    }

    pub fn release(&mut self, chunk: usize) {
        if let Some(slot) = self.allocation.get_mut(chunk) {
            *slot = None;
        }
    }
}

/// Number of maximal runs of consecutive indices in a sorted chunk set.
pub fn contiguous_runs(sorted_chunks: &[usize]) -> usize {
    if sorted_chunks.is_empty() {
        return 0;
    }
    let mut runs = 1;
    for w in sorted_chunks.windows(2) {
        if w[1] != w[0] + 1 {
            runs += 1;
        }
    }
    runs
}

/// Distance-dependent pathloss in dB: `128 + 38 log10(r / 1000)` for r in
/// meters.
pub fn pathloss_db(distance_m: f64) -> Result<f64, ModelError> {
    if !(distance_m > 0.0) {
        return Err(ModelError::NonPositiveDistance(distance_m));
    }
    Ok(128.0 + 38.0 * (distance_m / 1000.0).log10())
}

/// Linear pathloss (a loss factor >= 1 for any distance beyond ~0.4 m).
pub fn pathloss_linear(distance_m: f64) -> Result<f64, ModelError> {
    Ok(10f64.powf(pathloss_db(distance_m)? / 10.0))
}

/// Effective channel gain-to-interference-plus-noise ratio of a chunk set:
/// `|C| / sum_j (N_0 + I_j) M w / h_j`, in 1/W. Harmonic-mean structure: when
/// all per-chunk gains are equal it reduces to `h / ((N_0 + I) M w)`.
pub fn effective_channel_gain(
    node_dense_idx: usize,
    chunk_set: &[usize],
    channel: &ChannelRealization,
    env: &RadioEnvironment,
) -> Result<f64, ModelError> {
    if chunk_set.is_empty() {
        return Err(ModelError::EmptyChunkSet);
    }
    let mut denom = 0.0;
    for &j in chunk_set {
        denom += env.chunk_noise_w(j) / channel.gain(j, node_dense_idx);
    }
    Ok(chunk_set.len() as f64 / denom)
}

/// Draw a slot's channel realization for the given nodes (dense order).
///
/// Gains are `X / gamma_i` with `X = 1` (no fading) or `X ~ Exp(1)` drawn
/// independently per (chunk, node).
pub fn draw_channel<R: Rng>(
    nodes: &[&NodeState],
    n_chunks: usize,
    fading: FadingModel,
    rng: &mut R,
) -> ChannelRealization {
    let mut gains = Vec::with_capacity(n_chunks * nodes.len());
    for _ in 0..n_chunks {
        for node in nodes {
            let x = match fading {
                FadingModel::None => 1.0,
                FadingModel::RayleighBlock => exp1(rng),
            };
            gains.push(x * node.avg_gain());
        }
    }
    ChannelRealization::new(n_chunks, nodes.len(), gains)
}

/// Unit-mean exponential draw (squared magnitude of Rayleigh fading).
pub fn exp1<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    // 1 - u is in (0, 1], so the log is finite.
    -(1.0 - u).ln()
}

/// Place `n` nodes uniformly over the annulus [min_distance, cell_radius].
pub fn place_nodes_uniform_disk<R: Rng>(
    n: usize,
    cell_radius_m: f64,
    min_distance_m: f64,
    rng: &mut R,
) -> Vec<f64> {
    let r0sq = min_distance_m * min_distance_m;
    let rsq = cell_radius_m * cell_radius_m;
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            (r0sq + u * (rsq - r0sq)).sqrt()
        })
        .collect()
}
