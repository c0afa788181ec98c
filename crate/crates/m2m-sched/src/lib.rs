//! Battery-lifetime-aware uplink scheduling for cellular machine-to-machine
//! networks.
//!
//! The crate models per-node energy consumption and expected battery lifetime,
//! and provides a family of uplink schedulers built around those models:
//!
//! - a time-domain scheduler for narrow-band single-carrier systems, with a
//!   LambertW closed form and a max-min (water-level) solver ([`narrowband`]);
//! - chunk-based SC-FDMA scheduling with per-chunk channel state, optimal
//!   transmit power, and selection rules for four network-lifetime objectives
//!   ([`scfdma`]);
//! - a limited-feedback variant that only needs average pathloss and energy
//!   profiles ([`limited_feedback`]), plus its LTE instantiation driven by the
//!   transport-block-size table and open-loop power control ([`lte`]);
//! - conventional reference schedulers (round robin, channel-aware, sum-rate
//!   per power) used for comparison ([`baselines`]);
//! - a slotted Monte-Carlo simulator and experiment runner ([`sim`]), exposed
//!   through the `m2m-sched` command-line binary ([`cli`]).

pub mod baselines;
pub mod cli;
pub mod config;
pub mod lifetime;
pub mod limited_feedback;
pub mod link;
pub mod lte;
pub mod math;
pub mod model;
pub mod narrowband;
pub mod plot;
pub mod report;
pub mod scfdma;
pub mod sim;

pub use config::SimConfig;
pub use lifetime::LifetimeDefinition;
pub use sim::{run_experiment, run_replication, ExperimentSummary, SimReport};
