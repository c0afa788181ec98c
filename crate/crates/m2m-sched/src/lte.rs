//! LTE instantiation of the limited-feedback scheduler: grants are physical
//! resource block pairs (PRBPs), rate adaptation goes through the 3GPP
//! transport-block-size table, and transmit power follows the open-loop
//! power control rule. Includes the greedy PRBP scheduler and a linear
//! relaxation solved in closed form with randomized rounding.

use crate::math::{self, MathError};
use crate::model::NodeState;
use rand::Rng;
use std::path::Path;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LteError {
    #[error("failed to read TBS table: {0}")]
    Io(#[from] std::io::Error),
    #[error("TBS table parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("TBS table violates monotonicity: {0}")]
    Monotonicity(String),
    #[error("no TBS entry for n_prb={n_prb}, delta={delta}")]
    TableMiss { n_prb: usize, delta: usize },
    #[error("no TBS index carries {d_bar} bits over {n_prb} PRBP(s)")]
    NoFit { n_prb: usize, d_bar: f64 },
    #[error("node {0} infeasible even at the maximum PRBP count")]
    InfeasiblePrbp(usize),
    #[error(transparent)]
    Math(#[from] MathError),
}

/// dB-domain unit conversions. All open-loop power arithmetic funnels
/// through these to keep the dBm/dB handling in one place.
pub mod units {
    pub fn dbm_to_w(dbm: f64) -> f64 {
        10f64.powf(dbm / 10.0) / 1000.0
    }

    pub fn w_to_dbm(w: f64) -> f64 {
        10.0 * (w * 1000.0).log10()
    }

    pub fn db_to_linear(db: f64) -> f64 {
        10f64.powf(db / 10.0)
    }

    pub fn linear_to_db(x: f64) -> f64 {
        10.0 * x.log10()
    }
}

/// Transport block sizes indexed by (n_prb, delta).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TbsTable {
    n_prb_max: usize,
    delta_max: usize,
    /// Row-major: data[(n_prb - 1) * (delta_max + 1) + delta].
    data: Vec<u32>,
}

const BUNDLED_TBS_CSV: &str = include_str!("../data/tbs_36213.csv");
static BUNDLED_TABLE: OnceLock<TbsTable> = OnceLock::new();

impl TbsTable {
    /// Parse the `n_prb,delta,tbs_bits` CSV schema and validate completeness
    /// plus monotonicity along both axes.
    pub fn from_csv_str(text: &str) -> Result<Self, LteError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "n_prb,delta,tbs_bits" => {}
            Some((_, header)) => {
                return Err(LteError::Parse {
                    line: 1,
                    msg: format!("unexpected header {header:?}"),
                })
            }
            None => {
                return Err(LteError::Parse {
                    line: 1,
                    msg: "empty file".into(),
                })
            }
        }
        let mut entries: Vec<(usize, usize, u32)> = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |part: Option<&str>, what: &str| -> Result<u64, LteError> {
                part.ok_or_else(|| LteError::Parse {
                    line: line_no,
                    msg: format!("missing {what}"),
                })?
                .trim()
                .parse::<u64>()
                .map_err(|e| LteError::Parse {
                    line: line_no,
                    msg: format!("bad {what}: {e}"),
                })
            };
            let n = parse(parts.next(), "n_prb")? as usize;
            let d = parse(parts.next(), "delta")? as usize;
            let t = parse(parts.next(), "tbs_bits")? as u32;
            if parts.next().is_some() {
                return Err(LteError::Parse {
                    line: line_no,
                    msg: "too many columns".into(),
                });
            }
            if n == 0 {
                return Err(LteError::Parse {
                    line: line_no,
                    msg: "n_prb must be >= 1".into(),
                });
            }
            entries.push((n, d, t));
        }
        let n_prb_max = entries.iter().map(|e| e.0).max().unwrap_or(0);
        let delta_max = entries.iter().map(|e| e.1).max().unwrap_or(0);
        if n_prb_max == 0 {
            return Err(LteError::Parse {
                line: 2,
                msg: "no data rows".into(),
            });
        }
        let width = delta_max + 1;
        let mut data = vec![None::<u32>; n_prb_max * width];
        for (n, d, t) in entries {
            let slot = &mut data[(n - 1) * width + d];
            if slot.is_some() {
                return Err(LteError::Monotonicity(format!(
                    "duplicate entry for n_prb={n}, delta={d}"
                )));
            }
            *slot = Some(t);
        }
        let data: Vec<u32> = data
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| LteError::Parse {
                    line: 0,
                    msg: format!(
                        "missing entry for n_prb={}, delta={}",
                        i / width + 1,
                        i % width
                    ),
                })
            })
            .collect::<Result<_, _>>()?;
        let table = Self {
            n_prb_max,
            delta_max,
            data,
        };
        table.check_monotone()?;
        Ok(table)
    }

    fn check_monotone(&self) -> Result<(), LteError> {
        for n in 1..=self.n_prb_max {
            for d in 1..=self.delta_max {
                if self.get(n, d) < self.get(n, d - 1) {
                    return Err(LteError::Monotonicity(format!(
                        "TBS({n}, {d}) < TBS({n}, {})",
                        d - 1
                    )));
                }
            }
        }
        for d in 0..=self.delta_max {
            for n in 2..=self.n_prb_max {
                if self.get(n, d) < self.get(n - 1, d) {
                    return Err(LteError::Monotonicity(format!(
                        "TBS({n}, {d}) < TBS({}, {d})",
                        n - 1
                    )));
                }
            }
        }
        Ok(())
    }

    fn get(&self, n_prb: usize, delta: usize) -> u32 {
        self.data[(n_prb - 1) * (self.delta_max + 1) + delta]
    }

    pub fn tbs(&self, n_prb: usize, delta: usize) -> Result<u32, LteError> {
        if n_prb == 0 || n_prb > self.n_prb_max || delta > self.delta_max {
            return Err(LteError::TableMiss { n_prb, delta });
        }
        Ok(self.get(n_prb, delta))
    }

    pub fn n_prb_max(&self) -> usize {
        self.n_prb_max
    }

    pub fn delta_max(&self) -> usize {
        self.delta_max
    }

    /// Largest block that fits in one PRBP (968 bits in the bundled table).
    pub fn max_single_prbp(&self) -> u32 {
        self.get(1, self.delta_max)
    }

    /// The table bundled with the crate.
    pub fn bundled() -> &'static TbsTable {
        BUNDLED_TABLE.get_or_init(|| {
            TbsTable::from_csv_str(BUNDLED_TBS_CSV).expect("bundled TBS table is valid")
        })
    }
}

/// Load and validate a TBS table from a CSV file.
pub fn load_tbs(path: &Path) -> Result<TbsTable, LteError> {
    let text = std::fs::read_to_string(path)?;
    TbsTable::from_csv_str(&text)
}

/// Open-loop power control parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LtePowerParams {
    /// Pathloss compensation factor beta (0 < beta <= 1).
    pub beta: f64,
    /// Spectral-efficiency scale k_s (1.25 in the standard rule).
    pub k_s: f64,
    /// Symbols per PRBP.
    pub n_s: f64,
    /// Subcarriers per PRBP.
    pub n_sc: f64,
    /// Target receive SNR, dB.
    pub snr_target_db: f64,
    /// Noise power per resource block, dBm.
    pub p_n_dbm: f64,
    /// Maximum transmit power, dBm (enters the P_0 baseline).
    pub p_max_dbm: f64,
    /// Transmission time interval, seconds.
    pub tti_s: f64,
}

impl LtePowerParams {
    /// Baseline open-loop power `P_0` in watts:
    /// `P_0 = beta (SNR_target + P_n) + (1 - beta) P_max`, evaluated in the
    /// dBm domain and converted once.
    pub fn p0_w(&self) -> f64 {
        let p0_dbm =
            self.beta * (self.snr_target_db + self.p_n_dbm) + (1.0 - self.beta) * self.p_max_dbm;
        units::dbm_to_w(p0_dbm)
    }

    pub fn p_max_w(&self) -> f64 {
        units::dbm_to_w(self.p_max_dbm)
    }

    /// Symbol-subcarrier product `N_s N_sc` shared by the rate exponent.
    pub fn symbols_per_prbp(&self) -> f64 {
        self.n_s * self.n_sc
    }
}

/// Open-loop transmit power for a grant of `n_prb` PRBPs at TBS index
/// `delta`: `|C| P_0 beta gamma (2^(k_s TBS / (|C| N_s N_sc)) - 1)`.
pub fn powc(
    n_prb: usize,
    delta: usize,
    pathloss_linear: f64,
    params: &LtePowerParams,
    tbs: &TbsTable,
) -> Result<f64, LteError> {
    let block = tbs.tbs(n_prb, delta)? as f64;
    let exponent = params.k_s * block / (n_prb as f64 * params.symbols_per_prbp());
    Ok(n_prb as f64 * params.p0_w() * params.beta * pathloss_linear * (exponent.exp2() - 1.0))
}

/// Smallest TBS index carrying `d_bar` bits over `n_prb` PRBPs.
pub fn fun_d(n_prb: usize, d_bar_bits: f64, tbs: &TbsTable) -> Result<usize, LteError> {
    for delta in 0..=tbs.delta_max() {
        if tbs.tbs(n_prb, delta)? as f64 >= d_bar_bits {
            return Ok(delta);
        }
    }
    Err(LteError::NoFit {
        n_prb,
        d_bar: d_bar_bits,
    })
}

/// Minimum PRBP count at which some TBS index carries the report within the
/// power budget. Scanning the minimal fitting index per count suffices:
/// larger indices only raise both TBS and power.
pub fn min_prbp(
    node: &NodeState,
    params: &LtePowerParams,
    tbs: &TbsTable,
) -> Result<usize, LteError> {
    let d_bar = node.traffic.total_bits();
    for n in 1..=tbs.n_prb_max() {
        let Ok(delta) = fun_d(n, d_bar, tbs) else {
            continue;
        };
        let p = powc(n, delta, node.pathloss_linear, params, tbs)?;
        if p <= node.energy.max_power_w * (1.0 + 1e-12) {
            return Ok(n);
        }
    }
    Err(LteError::InfeasiblePrbp(node.id))
}

/// Expected lifetime under an LTE grant:
/// `E T / (E_s + TTI (P_c + xi PowC))`.
pub fn lifetime_lte(
    node: &NodeState,
    n_prb: usize,
    delta: usize,
    params: &LtePowerParams,
    tbs: &TbsTable,
) -> Result<f64, LteError> {
    let p = powc(n_prb, delta, node.pathloss_linear, params, tbs)?;
    let e_d = params.tti_s * (node.energy.circuit_power_w + node.energy.pa_inefficiency * p);
    Ok(
        (node.energy.remaining_j * node.traffic.period_s
            / (node.energy.static_per_report_j + e_d))
            .max(0.0),
    )
}

/// PRBP counts, TBS indices, and powers for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct LteAllocation {
    pub counts: Vec<usize>,
    pub deltas: Vec<usize>,
    pub powers: Vec<f64>,
    /// Nodes deferred to a later slot.
    pub deferred: Vec<usize>,
}

/// Greedy PRBP scheduling: start every admitted node at its minimum PRBP
/// count with the minimal fitting TBS index, then hand spare PRBPs one at a
/// time to the shortest-lifetime node as long as the extra PRBP keeps the
/// power legal and strictly improves its lifetime.
pub fn schedule_lte(
    nodes: &[&NodeState],
    total_prbp: usize,
    params: &LtePowerParams,
    tbs: &TbsTable,
) -> Result<LteAllocation, LteError> {
    let n = nodes.len();
    let mut counts = vec![0usize; n];
    let mut deltas = vec![0usize; n];
    let mut powers = vec![0.0; n];
    let mut deferred = Vec::new();

    let mut minima = vec![0usize; n];
    let mut admissible = Vec::new();
    for i in 0..n {
        match min_prbp(nodes[i], params, tbs) {
            Ok(y) if y <= total_prbp => {
                minima[i] = y;
                admissible.push(i);
            }
            Ok(_) | Err(LteError::InfeasiblePrbp(_)) => deferred.push(i),
            Err(e) => return Err(e),
        }
    }

    // Admission by ascending lifetime at the minimum allocation.
    let mut scored: Vec<(f64, usize)> = Vec::new();
    for &i in &admissible {
        let delta = fun_d(minima[i], nodes[i].traffic.total_bits(), tbs)?;
        let f = lifetime_lte(nodes[i], minima[i], delta, params, tbs)?;
        scored.push((f, i));
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(nodes[a.1].id.cmp(&nodes[b.1].id)));
    let mut admitted = Vec::new();
    let mut used = 0usize;
    for (_, i) in &scored {
        if used + minima[*i] <= total_prbp {
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
        deltas[i] = fun_d(counts[i], nodes[i].traffic.total_bits(), tbs)?;
        powers[i] = powc(counts[i], deltas[i], nodes[i].pathloss_linear, params, tbs)?;
        f[i] = lifetime_lte(nodes[i], counts[i], deltas[i], params, tbs)?;
    }

    let mut spare = total_prbp - used;
    let mut active = admitted.clone();
    while spare > 0 && !active.is_empty() {
        let m = *active
            .iter()
            .min_by(|&&a, &&b| f[a].total_cmp(&f[b]).then(nodes[a].id.cmp(&nodes[b].id)))
            .unwrap();
        let x = counts[m] + 1;
        let accept = if x > tbs.n_prb_max() {
            None
        } else {
            match fun_d(x, nodes[m].traffic.total_bits(), tbs) {
                Ok(delta) => {
                    let p = powc(x, delta, nodes[m].pathloss_linear, params, tbs)?;
                    let candidate = lifetime_lte(nodes[m], x, delta, params, tbs)?;
                    (p <= nodes[m].energy.max_power_w * (1.0 + 1e-12) && candidate > f[m])
                        .then_some((delta, p, candidate))
                }
                Err(_) => None,
            }
        };
        match accept {
            Some((delta, p, candidate)) => {
                counts[m] = x;
                deltas[m] = delta;
                powers[m] = p;
                f[m] = candidate;
                spare -= 1;
            }
            None => {
                active.retain(|&i| i != m);
                f[m] = f64::INFINITY;
            }
        }
    }

    Ok(LteAllocation {
        counts,
        deltas,
        powers,
        deferred,
    })
}

/// Continuous relaxation of the open-loop power at a fractional PRBP count,
/// with the report size in place of the table TBS:
/// `x P_0 beta gamma (2^(k_s D / (x N_s N_sc)) - 1)`.
pub fn powcont(x: f64, pathloss_linear: f64, d_bar_bits: f64, params: &LtePowerParams) -> f64 {
    let exponent = params.k_s * d_bar_bits / (x * params.symbols_per_prbp());
    x * params.p0_w() * params.beta * pathloss_linear * (exponent.exp2() - 1.0)
}

/// Lifetime at a fractional PRBP count under the continuous power relaxation.
pub fn lifetime_cont(x: f64, node: &NodeState, params: &LtePowerParams) -> f64 {
    let p = powcont(x, node.pathloss_linear, node.traffic.total_bits(), params);
    let e_d = params.tti_s * (node.energy.circuit_power_w + node.energy.pa_inefficiency * p);
    (node.energy.remaining_j * node.traffic.period_s / (node.energy.static_per_report_j + e_d))
        .max(0.0)
}

/// Smallest integer PRBP count whose continuous power fits the budget; the
/// lower clamp of the relaxed solution together with `D / max_single_tbs`.
pub fn min_prbp_continuous(
    node: &NodeState,
    params: &LtePowerParams,
    tbs: &TbsTable,
) -> Result<f64, LteError> {
    let d_bar = node.traffic.total_bits();
    let scan = (1..=tbs.n_prb_max()).find(|&n| {
        powcont(n as f64, node.pathloss_linear, d_bar, params)
            <= node.energy.max_power_w * (1.0 + 1e-12)
    });
    let c_m = scan.ok_or(LteError::InfeasiblePrbp(node.id))? as f64;
    Ok(c_m.max(d_bar / tbs.max_single_prbp() as f64))
}

/// Closed-form stationary point of the relaxed problem at dual ratio
/// `mu / lambda_i`:
/// `x* = max(x_min, k_s ln2 D / (N_s N_sc (1 + W(rho/e - 1/e))))` with
/// `rho = E T (mu/lambda) / (P_0 beta gamma xi TTI)`.
pub fn relaxed_count_closed_form(
    node: &NodeState,
    dual_ratio: f64,
    x_min: f64,
    params: &LtePowerParams,
) -> Result<f64, LteError> {
    let rho = node.energy.remaining_j * node.traffic.period_s * dual_ratio
        / (params.p0_w()
            * params.beta
            * node.pathloss_linear
            * node.energy.pa_inefficiency
            * params.tti_s);
    let arg = (rho - 1.0) / std::f64::consts::E;
    let lw = math::lambert_w(arg)?;
    let x = params.k_s * std::f64::consts::LN_2 * node.traffic.total_bits()
        / (params.symbols_per_prbp() * (1.0 + lw));
    Ok(x.max(x_min))
}

/// Relaxed allocation: fractional counts from the water-level solve plus the
/// rounded integer grant.
#[derive(Debug, Clone)]
pub struct RelaxedLteAllocation {
    /// Fractional optimum of the relaxed problem (0 for deferred nodes).
    pub fractional: Vec<f64>,
    /// Common lifetime level reached by non-clamped nodes.
    pub level_s: f64,
    /// Rounded, budget- and power-repaired grant.
    pub alloc: LteAllocation,
}

/// Solve the relaxed PRBP allocation by bisection on the common lifetime
/// level, then apply randomized rounding with a repair pass keeping the
/// budget, the per-node minima, and the power cap intact.
pub fn relaxed_schedule_lte<R: Rng>(
    nodes: &[&NodeState],
    total_prbp: usize,
    params: &LtePowerParams,
    tbs: &TbsTable,
    rng: &mut R,
) -> Result<RelaxedLteAllocation, LteError> {
    let n = nodes.len();
    let cap = tbs.n_prb_max().min(total_prbp) as f64;
    let mut fractional = vec![0.0; n];
    let mut counts = vec![0usize; n];
    let mut deltas = vec![0usize; n];
    let mut powers = vec![0.0; n];
    let mut deferred = Vec::new();

    // Integer floors (table-consistent) and continuous clamps.
    let mut int_min = vec![0usize; n];
    let mut x_min = vec![0.0; n];
    let mut admissible = Vec::new();
    for i in 0..n {
        match (min_prbp(nodes[i], params, tbs), min_prbp_continuous(nodes[i], params, tbs)) {
            (Ok(m), Ok(xm)) if m <= total_prbp => {
                int_min[i] = m;
                x_min[i] = xm.max(m as f64).min(cap);
                admissible.push(i);
            }
            (Ok(_), Ok(_)) | (Err(LteError::InfeasiblePrbp(_)), _) | (_, Err(LteError::InfeasiblePrbp(_))) => {
                deferred.push(i)
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }

    // Admission by ascending lifetime at the integer minimum.
    let mut scored: Vec<(f64, usize)> = Vec::new();
    for &i in &admissible {
        let delta = fun_d(int_min[i], nodes[i].traffic.total_bits(), tbs)?;
        scored.push((lifetime_lte(nodes[i], int_min[i], delta, params, tbs)?, i));
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(nodes[a.1].id.cmp(&nodes[b.1].id)));
    let mut admitted = Vec::new();
    let mut used = 0usize;
    for (_, i) in &scored {
        if used + int_min[*i] <= total_prbp {
            used += int_min[*i];
            admitted.push(*i);
        } else {
            deferred.push(*i);
        }
    }
    admitted.sort_unstable();
    deferred.sort_unstable();

    if admitted.is_empty() {
        return Ok(RelaxedLteAllocation {
            fractional,
            level_s: 0.0,
            alloc: LteAllocation {
                counts,
                deltas,
                powers,
                deferred,
            },
        });
    }

    // Water-level solve: lifetime_cont is increasing in x, so the count
    // reaching level L is unique; clamp into [x_min, cap].
    let count_at_level = |i: usize, level: f64| -> f64 {
        if lifetime_cont(x_min[i], nodes[i], params) >= level {
            return x_min[i];
        }
        if lifetime_cont(cap, nodes[i], params) <= level {
            return cap;
        }
        let (mut lo, mut hi) = (x_min[i], cap);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if lifetime_cont(mid, nodes[i], params) < level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let budget = total_prbp as f64;
    let mut level_lo = admitted
        .iter()
        .map(|&i| lifetime_cont(x_min[i], nodes[i], params))
        .fold(f64::INFINITY, f64::min);
    let mut level_hi = admitted
        .iter()
        .map(|&i| lifetime_cont(cap, nodes[i], params))
        .fold(f64::NEG_INFINITY, f64::max)
        * (1.0 + 1e-9);
    for _ in 0..100 {
        let level = 0.5 * (level_lo + level_hi);
        let total: f64 = admitted.iter().map(|&i| count_at_level(i, level)).sum();
        if total <= budget {
            level_lo = level;
        } else {
            level_hi = level;
        }
    }
    let level = level_lo;
    for &i in &admitted {
        fractional[i] = count_at_level(i, level);
    }

    // Randomized rounding with repair.
    for &i in &admitted {
        let floor = fractional[i].floor();
        let frac = fractional[i] - floor;
        let up: f64 = rng.random();
        let mut y = floor as usize + usize::from(up < frac);
        y = y.clamp(int_min[i], cap as usize);
        counts[i] = y;
    }
    // Budget repair: shed from the largest overshoot first.
    loop {
        let total: usize = counts.iter().sum();
        if total <= total_prbp {
            break;
        }
        let over = admitted
            .iter()
            .copied()
            .filter(|&i| counts[i] > int_min[i])
            .max_by(|&a, &b| {
                let oa = counts[a] as f64 - fractional[a];
                let ob = counts[b] as f64 - fractional[b];
                oa.total_cmp(&ob).then(nodes[b].id.cmp(&nodes[a].id))
            });
        match over {
            Some(i) => counts[i] -= 1,
            None => break,
        }
    }
    // Spend leftover budget on the largest residuals.
    loop {
        let total: usize = counts.iter().sum();
        if total >= total_prbp {
            break;
        }
        let under = admitted
            .iter()
            .copied()
            .filter(|&i| counts[i] < cap as usize)
            .max_by(|&a, &b| {
                let ra = fractional[a] - counts[a] as f64;
                let rb = fractional[b] - counts[b] as f64;
                ra.total_cmp(&rb).then(nodes[b].id.cmp(&nodes[a].id))
            });
        match under {
            Some(i) => counts[i] += 1,
            None => break,
        }
    }

    // TBS indices and powers; a table-quantization overshoot can push the
    // power past the cap, in which case the known-good minimum applies.
    for &i in &admitted {
        let d_bar = nodes[i].traffic.total_bits();
        let mut y = counts[i];
        let mut delta = fun_d(y, d_bar, tbs)?;
        let mut p = powc(y, delta, nodes[i].pathloss_linear, params, tbs)?;
        if p > nodes[i].energy.max_power_w * (1.0 + 1e-12) {
            y = int_min[i];
            delta = fun_d(y, d_bar, tbs)?;
            p = powc(y, delta, nodes[i].pathloss_linear, params, tbs)?;
        }
        counts[i] = y;
        deltas[i] = delta;
        powers[i] = p;
    }

    Ok(RelaxedLteAllocation {
        fractional,
        level_s: level,
        alloc: LteAllocation {
            counts,
            deltas,
            powers,
            deferred,
        },
    })
}
