//! Time-domain scheduler for narrow-band single-carrier systems: one node
//! occupies the whole band at a time, so scheduling reduces to splitting the
//! slot's airtime. The max-min-lifetime optimum is found by bisection on the
//! common inverse-lifetime level, with a LambertW closed form for the
//! per-node stationarity condition.

use crate::math::{self, MathError, RateModel};
use crate::model::NodeState;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NarrowbandError {
    #[error("sum of minimum airtimes exceeds the slot by {deficit_s} s")]
    Infeasible { deficit_s: f64 },
    #[error("closed form requires gamma_mcs = 1, got {0}")]
    RequiresUnitGamma(f64),
    #[error("no nodes to schedule")]
    Empty,
    #[error(transparent)]
    Math(#[from] MathError),
}

/// Per-node airtime split plus the dual variables at the optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeAllocation {
    /// Airtime per node, seconds, aligned with the input slice.
    pub airtimes_s: Vec<f64>,
    /// Budget multiplier mu (0 when the slot is not binding).
    pub multiplier: f64,
    /// Per-node weights lambda_i (sum to 1).
    pub lambdas: Vec<f64>,
    /// Common inverse-lifetime level reached by non-clamped nodes.
    pub inverse_lifetime_level: f64,
}

/// Channel-dependent constants of one node in the narrow-band model.
#[derive(Debug, Clone, Copy)]
struct LinkCoeffs {
    /// (N_0 + I) w / (h G): transmit power per unit SNR.
    power_per_snr: f64,
}

fn coeffs(node: &NodeState, noise_psd: f64, interference_psd: f64, bw_hz: f64) -> LinkCoeffs {
    LinkCoeffs {
        power_per_snr: (noise_psd + interference_psd) * bw_hz / node.avg_gain(),
    }
}

/// Minimum airtime that fits one report at P_max:
/// `tau_m = D / rate_for_snr(P_max h G / ((N_0 + I) w))`.
pub fn min_airtime(
    node: &NodeState,
    noise_psd: f64,
    interference_psd: f64,
    antenna_gain: f64,
    model: &RateModel,
) -> f64 {
    let c = coeffs(node, noise_psd, interference_psd, model.subcarrier_bw_hz);
    let snr_cap = node.energy.max_power_w * antenna_gain / c.power_per_snr;
    node.traffic.total_bits() / math::rate_for_snr(snr_cap, model)
}

/// Transmit power needed to send the report in `airtime` seconds.
fn power_for_airtime(
    node: &NodeState,
    airtime_s: f64,
    antenna_gain: f64,
    c: LinkCoeffs,
    model: &RateModel,
) -> f64 {
    let snr = math::snr_for_rate(node.traffic.total_bits() / airtime_s, model);
    snr * c.power_per_snr / antenna_gain
}

/// Inverse lifetime 1/L as a function of airtime; strictly convex, decreasing
/// up to the unconstrained optimum and increasing past it (circuit energy
/// dominates long transmissions).
fn inverse_lifetime(
    node: &NodeState,
    airtime_s: f64,
    antenna_gain: f64,
    c: LinkCoeffs,
    model: &RateModel,
) -> f64 {
    let p = power_for_airtime(node, airtime_s, antenna_gain, c, model);
    let e_d = airtime_s * (node.energy.circuit_power_w + node.energy.pa_inefficiency * p);
    (node.energy.static_per_report_j + e_d)
        / (node.energy.remaining_j * node.traffic.period_s)
}

/// Closed-form optimal airtime at dual ratio `mu / lambda_i`:
/// `max(tau_m, ln2 D / (w (1 + W(arg))))` with
/// `arg = ((h G (P_c + T E mu/lambda)) / (xi (N_0+I) w) - 1) / e`.
///
/// The ratio 0 gives the resource-unconstrained optimum. Only valid for
/// `gamma_mcs = 1`.
pub fn closed_form_airtime(
    node: &NodeState,
    dual_ratio: f64,
    noise_psd: f64,
    interference_psd: f64,
    antenna_gain: f64,
    model: &RateModel,
) -> Result<f64, NarrowbandError> {
    if (model.gamma_mcs - 1.0).abs() > 1e-12 {
        return Err(NarrowbandError::RequiresUnitGamma(model.gamma_mcs));
    }
    let w = model.subcarrier_bw_hz;
    let e = &node.energy;
    let effective_power =
        e.circuit_power_w + node.traffic.period_s * e.remaining_j * dual_ratio;
    let bracket = node.avg_gain() * antenna_gain * effective_power
        / (e.pa_inefficiency * (noise_psd + interference_psd) * w);
    let arg = (bracket - 1.0) / std::f64::consts::E;
    let lw = math::lambert_w(arg)?;
    let tau_star = std::f64::consts::LN_2 * node.traffic.total_bits() / (w * (1.0 + lw));
    let tau_m = min_airtime(node, noise_psd, interference_psd, antenna_gain, model);
    Ok(tau_star.max(tau_m))
}

/// Airtime at which a node reaches inverse lifetime `z`, clamped to
/// `[tau_m, tau_u]`; `g` is decreasing on that interval.
fn airtime_for_level(
    node: &NodeState,
    z: f64,
    tau_m: f64,
    tau_u: f64,
    antenna_gain: f64,
    c: LinkCoeffs,
    model: &RateModel,
) -> f64 {
    let g = |t: f64| inverse_lifetime(node, t, antenna_gain, c, model);
    if g(tau_m) <= z {
        return tau_m;
    }
    if g(tau_u) >= z {
        return tau_u;
    }
    let mut lo = tau_m;
    let mut hi = tau_u;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > z {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Max-min-lifetime airtime split of a slot of `slot_s` seconds.
///
/// All nodes not clamped at their minimum airtime end at a common inverse
/// lifetime; when the slot is not binding every node sits at its
/// unconstrained energy optimum instead.
pub fn schedule_narrowband(
    nodes: &[&NodeState],
    slot_s: f64,
    noise_psd: f64,
    interference_psd: f64,
    antenna_gain: f64,
    model: &RateModel,
) -> Result<TimeAllocation, NarrowbandError> {
    if nodes.is_empty() {
        return Err(NarrowbandError::Empty);
    }
    let coeff: Vec<LinkCoeffs> = nodes
        .iter()
        .map(|n| coeffs(n, noise_psd, interference_psd, model.subcarrier_bw_hz))
        .collect();
    let tau_m: Vec<f64> = nodes
        .iter()
        .map(|n| min_airtime(n, noise_psd, interference_psd, antenna_gain, model))
        .collect();
    let total_min: f64 = tau_m.iter().sum();
    if total_min > slot_s * (1.0 + 1e-12) {
        return Err(NarrowbandError::Infeasible {
            deficit_s: total_min - slot_s,
        });
    }

    let tau_u: Vec<f64> = nodes
        .iter()
        .map(|n| {
            closed_form_airtime(n, 0.0, noise_psd, interference_psd, antenna_gain, model)
        })
        .collect::<Result<_, _>>()?;

    let g_at = |i: usize, t: f64| inverse_lifetime(nodes[i], t, antenna_gain, coeff[i], model);

    // Slack slot: everyone takes the unconstrained optimum.
    if tau_u.iter().sum::<f64>() <= slot_s {
        let airtimes = tau_u.clone();
        let level = (0..nodes.len())
            .map(|i| g_at(i, airtimes[i]))
            .fold(f64::NEG_INFINITY, f64::max);
        // mu = 0; lambda concentrates on the bottleneck node.
        let bottleneck = (0..nodes.len())
            .max_by(|&a, &b| g_at(a, airtimes[a]).total_cmp(&g_at(b, airtimes[b])))
            .unwrap();
        let mut lambdas = vec![0.0; nodes.len()];
        lambdas[bottleneck] = 1.0;
        return Ok(TimeAllocation {
            airtimes_s: airtimes,
            multiplier: 0.0,
            lambdas,
            inverse_lifetime_level: level,
        });
    }

    // Binding slot: bisect the common level z between the best reachable
    // level and the all-at-minimum level.
    let mut z_lo = (0..nodes.len())
        .map(|i| g_at(i, tau_u[i]))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut z_hi = (0..nodes.len())
        .map(|i| g_at(i, tau_m[i]))
        .fold(f64::NEG_INFINITY, f64::max);
    let alloc_at = |z: f64| -> Vec<f64> {
        (0..nodes.len())
            .map(|i| airtime_for_level(nodes[i], z, tau_m[i], tau_u[i], antenna_gain, coeff[i], model))
            .collect()
    };
    let mut airtimes = alloc_at(z_hi);
    for _ in 0..200 {
        let z = 0.5 * (z_lo + z_hi);
        let cand = alloc_at(z);
        let total: f64 = cand.iter().sum();
        if total <= slot_s {
            z_hi = z;
            airtimes = cand;
            if (slot_s - total).abs() <= 1e-9 * slot_s {
                break;
            }
        } else {
            z_lo = z;
        }
        if (z_hi - z_lo) <= 1e-15 * z_hi.abs() {
            break;
        }
    }
    let level = z_hi;

    // Recover duals from stationarity: mu = -lambda_i g_i'(tau_i) for
    // interior nodes, with sum(lambda) = 1.
    let mut inv_slopes = vec![0.0; nodes.len()];
    let mut slope_sum = 0.0;
    for i in 0..nodes.len() {
        let t = airtimes[i];
        if t > tau_m[i] * (1.0 + 1e-9) && t < tau_u[i] * (1.0 - 1e-9) {
            let h = t * 1e-6;
            let slope = (g_at(i, t + h) - g_at(i, t - h)) / (2.0 * h);
            if slope < 0.0 {
                inv_slopes[i] = -1.0 / slope;
                slope_sum += inv_slopes[i];
            }
        }
    }
    let (multiplier, lambdas) = if slope_sum > 0.0 {
        let mu = 1.0 / slope_sum;
        (mu, inv_slopes.iter().map(|s| s * mu).collect())
    } else {
        // Everyone clamped; attribute the level to the worst node.
        let worst = (0..nodes.len())
            .max_by(|&a, &b| g_at(a, airtimes[a]).total_cmp(&g_at(b, airtimes[b])))
            .unwrap();
        let mut l = vec![0.0; nodes.len()];
        l[worst] = 1.0;
        (0.0, l)
    };

    Ok(TimeAllocation {
        airtimes_s: airtimes,
        multiplier,
        lambdas,
        inverse_lifetime_level: level,
    })
}
