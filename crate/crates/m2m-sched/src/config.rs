//! Experiment configuration: a sectioned key=value file (TOML) mirroring the
//! simulator's parameters, with dB-domain quantities converted once at load.

use crate::lifetime::LifetimeDefinition;
use crate::link::LinkKind;
use crate::lte::{units, LtePowerParams, TbsTable};
use crate::math::RateModel;
use crate::model::{EnergyProfile, FadingModel, RadioEnvironment};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("bad override {0:?}: expected section.key=value")]
    BadOverride(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub node_count: usize,
    pub cell_radius_m: f64,
    pub min_distance_m: f64,
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self {
            node_count: 2000,
            cell_radius_m: 500.0,
            min_distance_m: 35.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficSection {
    /// Mean reporting period T_i, seconds (Poisson reporting).
    pub period_s: f64,
    /// Report payload, bits (payload + overhead is what goes over the air).
    pub payload_bits: f64,
    pub overhead_bits: f64,
}

impl Default for TrafficSection {
    fn default() -> Self {
        Self {
            period_s: 300.0,
            payload_bits: 600.0,
            overhead_bits: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySection {
    /// Initial battery capacity, joules.
    pub initial_j: f64,
    /// Static energy per report E_s, joules.
    pub static_per_report_j: f64,
    /// Circuit power, dBm.
    pub circuit_power_dbm: f64,
    /// Inverse PA efficiency xi (>= 1).
    pub pa_inefficiency: f64,
    /// Maximum transmit power, dBm.
    pub max_power_dbm: f64,
}

impl Default for EnergySection {
    fn default() -> Self {
        Self {
            initial_j: 2e-3,
            static_per_report_j: 10e-6,
            circuit_power_dbm: 7.0,
            pa_inefficiency: 2.5,
            max_power_dbm: 24.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioSection {
    pub noise_psd_dbm_hz: f64,
    pub interference_psd_w_hz: f64,
    pub antenna_gain_db: f64,
    pub subcarrier_bw_hz: f64,
    pub subcarriers_per_chunk: usize,
    /// Chunks (PRBPs) in one scheduling slot.
    pub chunks_per_slot: usize,
    pub slot_len_s: f64,
    pub max_clusters: usize,
    /// SNR gap of the modulation-and-coding scheme (linear).
    pub gamma_mcs: f64,
}

impl Default for RadioSection {
    fn default() -> Self {
        Self {
            noise_psd_dbm_hz: -174.0,
            interference_psd_w_hz: 0.0,
            antenna_gain_db: 0.0,
            subcarrier_bw_hz: 15e3,
            subcarriers_per_chunk: 12,
            chunks_per_slot: 6,
            slot_len_s: 1e-3,
            max_clusters: 1,
            gamma_mcs: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LteSection {
    pub beta: f64,
    pub k_s: f64,
    pub n_s: f64,
    pub n_sc: f64,
    pub snr_target_db: f64,
    /// Noise power per resource block, dBm. When absent it is derived from
    /// the noise PSD over one block (N_sc subcarriers).
    pub p_n_dbm: Option<f64>,
    /// Optional path to an external TBS table; empty means the bundled one.
    pub tbs_table: String,
}

impl Default for LteSection {
    fn default() -> Self {
        Self {
            beta: 0.92,
            k_s: 1.25,
            n_s: 12.0,
            n_sc: 12.0,
            snr_target_db: 1.0,
            p_n_dbm: Some(-127.0),
            tbs_table: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    /// Scheduling scheme 1..6.
    pub scheme: u8,
    /// Objective for scheme 1 (scheme 3 always maximizes the longest
    /// lifetime).
    pub objective: LifetimeDefinition,
    pub fading: String,
    pub seed: u64,
    pub replications: usize,
    /// Scheduling slots reserved for machine traffic per reservation period.
    pub reserved_subframes: u32,
    /// Length of one reservation period, seconds.
    pub reserved_period_s: f64,
    /// "bunched" packs the reserved subframes at the period start (the
    /// radio-frame layout); "even" spreads them across the period.
    pub reserved_spacing: String,
    /// Hard simulation horizon, seconds.
    pub horizon_s: f64,
    /// Stop once this fraction of nodes has drained (1.0 = run to the end).
    pub stop_after_drain_fraction: f64,
    pub snapshot_interval_s: f64,
    /// Link model per scheme for the limited-CSI schedulers.
    pub scheme2_link: LinkKind,
    pub scheme4_link: LinkKind,
    pub scheme5_link: LinkKind,
    pub scheme6_link: LinkKind,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            scheme: 1,
            objective: LifetimeDefinition::Sil,
            fading: "rayleigh_block".into(),
            seed: 42,
            replications: 20,
            reserved_subframes: 5,
            reserved_period_s: 2.0,
            reserved_spacing: "even".into(),
            horizon_s: 2e5,
            stop_after_drain_fraction: 1.0,
            snapshot_interval_s: 1000.0,
            scheme2_link: LinkKind::Lte,
            scheme4_link: LinkKind::Lte,
            scheme5_link: LinkKind::Lte,
            scheme6_link: LinkKind::Lte,
        }
    }
}

/// Full experiment configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub network: NetworkSection,
    pub traffic: TrafficSection,
    pub energy: EnergySection,
    pub radio: RadioSection,
    pub lte: LteSection,
    pub sim: SimSection,
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: SimConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Apply a `section.key=value` override on top of the loaded file.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (path, value) = spec
            .split_once('=')
            .ok_or_else(|| ConfigError::BadOverride(spec.into()))?;
        let (section, key) = path
            .trim()
            .split_once('.')
            .ok_or_else(|| ConfigError::BadOverride(spec.into()))?;
        // Round-trip through TOML so every field keeps one parsing path.
        let mut doc: toml::Table =
            toml::from_str(&toml::to_string(self).expect("config serializes")).unwrap();
        let entry = doc
            .get_mut(section)
            .and_then(|s| s.as_table_mut())
            .ok_or_else(|| ConfigError::BadOverride(spec.into()))?;
        let value = value.trim();
        // Optional fields are absent from the serialized table; parse the
        // value as TOML then and let the schema reject unknown keys.
        let parsed: toml::Value = match entry.get(key) {
            Some(toml::Value::String(_)) => toml::Value::String(value.into()),
            _ => value
                .parse::<toml::Value>()
                .unwrap_or_else(|_| toml::Value::String(value.into())),
        };
        entry.insert(key.into(), parsed);
        let text = toml::to_string(&doc).expect("table serializes");
        *self = Self::from_toml_str(&text)?;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut problems = Vec::new();
        if self.network.node_count == 0 {
            problems.push("network.node_count must be >= 1".to_string());
        }
        if !(self.network.min_distance_m > 0.0)
            || self.network.cell_radius_m <= self.network.min_distance_m
        {
            problems.push("network cell radius must exceed the minimum distance".to_string());
        }
        if !(self.traffic.period_s > 0.0) || !(self.traffic.payload_bits > 0.0) {
            problems.push("traffic period and payload must be positive".to_string());
        }
        if self.traffic.overhead_bits < 0.0 {
            problems.push("traffic.overhead_bits must be >= 0".to_string());
        }
        if !(self.energy.initial_j > 0.0) || self.energy.pa_inefficiency < 1.0 {
            problems.push("energy.initial_j must be > 0 and pa_inefficiency >= 1".to_string());
        }
        if self.radio.gamma_mcs < 1.0 {
            problems.push("radio.gamma_mcs must be >= 1".to_string());
        }
        if self.radio.subcarriers_per_chunk == 0
            || self.radio.chunks_per_slot == 0
            || self.radio.max_clusters == 0
            || !(self.radio.subcarrier_bw_hz > 0.0)
            || !(self.radio.slot_len_s > 0.0)
        {
            problems.push("radio grid parameters must be positive".to_string());
        }
        if !(1..=6).contains(&self.sim.scheme) {
            problems.push(format!("sim.scheme must be 1..6, got {}", self.sim.scheme));
        }
        if self.sim.replications == 0 {
            problems.push("sim.replications must be >= 1".to_string());
        }
        if self.sim.reserved_subframes == 0
            || !(self.sim.reserved_period_s > 0.0)
            || self.sim.reserved_subframes as f64 * self.radio.slot_len_s
                > self.sim.reserved_period_s
        {
            problems.push(
                "sim reserved subframes must fit into the reservation period".into(),
            );
        }
        if !matches!(self.sim.reserved_spacing.as_str(), "even" | "bunched") {
            problems.push(format!(
                "sim.reserved_spacing must be 'even' or 'bunched', got {:?}",
                self.sim.reserved_spacing
            ));
        }
        if !(self.sim.horizon_s > 0.0) {
            problems.push("sim.horizon_s must be positive".to_string());
        }
        if !(0.0..=1.0).contains(&self.sim.stop_after_drain_fraction) {
            problems.push("sim.stop_after_drain_fraction must be in [0, 1]".to_string());
        }
        if !(self.lte.beta > 0.0 && self.lte.beta <= 1.0) {
            problems.push("lte.beta must be in (0, 1]".to_string());
        }
        if self.fading_model().is_none() {
            problems.push(format!(
                "sim.fading must be 'none' or 'rayleigh_block', got {:?}",
                self.sim.fading
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(problems.join("; ")))
        }
    }

    pub fn fading_model(&self) -> Option<FadingModel> {
        match self.sim.fading.as_str() {
            "none" => Some(FadingModel::None),
            "rayleigh_block" => Some(FadingModel::RayleighBlock),
            _ => None,
        }
    }

    pub fn radio_environment(&self) -> RadioEnvironment {
        RadioEnvironment {
            noise_psd_w_hz: units::dbm_to_w(self.radio.noise_psd_dbm_hz),
            interference_psd_w_hz: self.radio.interference_psd_w_hz,
            interference_per_chunk: None,
            antenna_gain: units::db_to_linear(self.radio.antenna_gain_db),
            subcarrier_bw_hz: self.radio.subcarrier_bw_hz,
            subcarriers_per_chunk: self.radio.subcarriers_per_chunk,
            slot_len_s: self.radio.slot_len_s,
            max_clusters: self.radio.max_clusters,
        }
    }

    pub fn rate_model(&self) -> RateModel {
        RateModel::new(self.radio.subcarrier_bw_hz, self.radio.gamma_mcs)
    }

    /// Noise power per resource block in dBm, derived from the PSD unless
    /// pinned in the config.
    pub fn p_n_dbm(&self) -> f64 {
        self.lte.p_n_dbm.unwrap_or_else(|| {
            let per_block_w = units::dbm_to_w(self.radio.noise_psd_dbm_hz)
                * self.lte.n_sc
                * self.radio.subcarrier_bw_hz;
            units::w_to_dbm(per_block_w)
        })
    }

    pub fn lte_params(&self) -> LtePowerParams {
        LtePowerParams {
            beta: self.lte.beta,
            k_s: self.lte.k_s,
            n_s: self.lte.n_s,
            n_sc: self.lte.n_sc,
            snr_target_db: self.lte.snr_target_db,
            p_n_dbm: self.p_n_dbm(),
            p_max_dbm: self.energy.max_power_dbm,
            tti_s: self.radio.slot_len_s,
        }
    }

    pub fn load_tbs_table(&self) -> Result<TbsTable, crate::lte::LteError> {
        if self.lte.tbs_table.is_empty() {
            Ok(TbsTable::bundled().clone())
        } else {
            crate::lte::load_tbs(Path::new(&self.lte.tbs_table))
        }
    }

    pub fn energy_profile(&self) -> EnergyProfile {
        EnergyProfile {
            remaining_j: self.energy.initial_j,
            initial_j: self.energy.initial_j,
            static_per_report_j: self.energy.static_per_report_j,
            circuit_power_w: units::dbm_to_w(self.energy.circuit_power_dbm),
            pa_inefficiency: self.energy.pa_inefficiency,
            max_power_w: units::dbm_to_w(self.energy.max_power_dbm),
        }
    }

    /// Link model a given scheme's grants are priced on.
    pub fn scheme_link(&self, scheme: u8) -> LinkKind {
        match scheme {
            2 => self.sim.scheme2_link,
            4 => self.sim.scheme4_link,
            5 => self.sim.scheme5_link,
            6 => self.sim.scheme6_link,
            _ => LinkKind::Shannon,
        }
    }

    /// Canonical serialized form (stable across runs for hashing).
    pub fn canonical_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// FNV-1a hash of the canonical form, for output provenance lines.
    pub fn content_hash(&self) -> u64 {
        fnv1a64(self.canonical_toml().as_bytes())
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
