//! Scalar numerical kernels shared by all schedulers: the LambertW function,
//! the rate/SNR gap functions, and a golden-section minimizer used as an
//! internal oracle for the closed-form solutions.

use thiserror::Error;

/// 1/e, the left edge of the LambertW principal branch domain.
pub const NEG_INV_E: f64 = -0.367_879_441_171_442_33;

const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

#[derive(Debug, Error, PartialEq)]
pub enum MathError {
    #[error("lambert_w argument {0} below branch point -1/e")]
    LambertDomain(f64),
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
}

/// Rate model for the Shannon-style link: `S(x) = (2^(x/w) - 1) * gamma_mcs`
/// maps a spectral load (bits/s per subcarrier) to the linear SNR required to
/// carry it, and `rate_for_snr` is its inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateModel {
    /// Subcarrier bandwidth in Hz.
    pub subcarrier_bw_hz: f64,
    /// SNR gap between channel capacity and the practical MCS (linear, >= 1).
    pub gamma_mcs: f64,
}

impl RateModel {
    pub fn new(subcarrier_bw_hz: f64, gamma_mcs: f64) -> Self {
        assert!(subcarrier_bw_hz > 0.0, "subcarrier bandwidth must be > 0");
        assert!(gamma_mcs >= 1.0, "MCS gap must be >= 1");
        Self {
            subcarrier_bw_hz,
            gamma_mcs,
        }
    }
}

/// Principal branch of the LambertW function: the `y >= -1` solution of
/// `y * exp(y) = x`, defined for `x >= -1/e`.
///
/// Halley iteration seeded by a log-based (or branch-point series) initial
/// guess; converges to ~1e-15 relative in a handful of steps.
pub fn lambert_w(x: f64) -> Result<f64, MathError> {
    if x.is_nan() {
        return Err(MathError::LambertDomain(x));
    }
    if x < NEG_INV_E {
        // Tolerate tiny negative excursions from rounding near the branch point.
        if x > NEG_INV_E * (1.0 + 1e-12) {
            return Ok(-1.0);
        }
        return Err(MathError::LambertDomain(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }

    let mut w = if x < -0.25 {
        // Series around the branch point: w = -1 + p - p^2/3 + 11 p^3/72, with
        // p = sqrt(2 (1 + e x)).
        let p = (2.0 * (1.0 + std::f64::consts::E * x)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0
    } else if x < std::f64::consts::E {
        x.ln_1p()
    } else {
        let l = x.ln();
        l - l.ln()
    };

    for _ in 0..50 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        // Halley step: f' = e^w (w+1), f'' = e^w (w+2).
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 {
            break;
        }
        let step = f / denom;
        w -= step;
        if step.abs() <= 1e-12 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w.max(-1.0))
}

/// SNR required to carry a spectral load of `x` bits/s on one subcarrier:
/// `S(x) = (2^(x/w) - 1) * gamma_mcs`. Strictly convex and increasing with
/// `S(0) = 0`.
pub fn snr_for_rate(x: f64, model: &RateModel) -> f64 {
    ((x / model.subcarrier_bw_hz).exp2() - 1.0) * model.gamma_mcs
}

/// Inverse of [`snr_for_rate`]: achievable bits/s on one subcarrier at linear
/// SNR `eta`, i.e. `w * log2(1 + eta / gamma_mcs)`.
pub fn rate_for_snr(eta: f64, model: &RateModel) -> f64 {
    model.subcarrier_bw_hz * (1.0 + eta / model.gamma_mcs).log2()
}

/// Golden-section search for the minimizer of a unimodal function on
/// `[lo, hi]`, to within `tol`.
pub fn minimize_unimodal<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, MathError> {
    if !(lo < hi) || !tol.is_finite() || tol <= 0.0 {
        return Err(MathError::InvalidInterval { lo, hi });
    }
    let inv_phi = 1.0 / GOLDEN_RATIO;
    let mut a = lo;
    let mut b = hi;
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    Ok(0.5 * (a + b))
}
