//! Rayleigh block fading with capture and successive interference
//! cancellation inside a slot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, poisson_tail_bound};
use crate::poisson::{check_loads, PoissonReceiver};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptureParams {
    /// Signal to noise ratio, linear.
    pub gamma: f64,
    /// SINR decoding threshold, linear.
    pub threshold: f64,
    #[serde(default = "default_max_terms")]
    pub max_terms: u32,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_max_terms() -> u32 {
    10_000
}

fn default_tolerance() -> f64 {
    1e-13
}

impl CaptureParams {
    pub fn new(gamma: f64, threshold: f64) -> Result<Self> {
        let p = CaptureParams { gamma, threshold, max_terms: default_max_terms(), tolerance: default_tolerance() };
        p.validate()?;
        Ok(p)
    }

    pub fn from_db(gamma_db: f64, threshold_db: f64) -> Result<Self> {
        Self::new(db_to_linear(gamma_db), db_to_linear(threshold_db))
    }

    pub fn with_truncation(mut self, max_terms: u32, tolerance: f64) -> Result<Self> {
        self.max_terms = max_terms;
        self.tolerance = tolerance;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma = {} must be positive", self.gamma)));
        }
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(Error::InvalidParameter(format!("threshold = {} must be positive", self.threshold)));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::InvalidParameter(format!("tolerance = {} must lie in (0, 1)", self.tolerance)));
        }
        Ok(())
    }

    fn ln_one_plus_b(&self) -> f64 {
        self.threshold.ln_1p()
    }

    /// `ln` of the probability that the first `r` of `n` signals decode in order.
    fn ln_ordered(&self, n: u32, r: u32) -> f64 {
        let rf = r as f64;
        let power = (rf * self.ln_one_plus_b()).exp();
        -(power - 1.0) / self.gamma - rf * (n as f64 - 1.0 - (rf - 1.0) / 2.0) * self.ln_one_plus_b()
    }
}

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

/// Probability that among `n` superposed signals the ones labelled `1..=r`
/// are decoded in that order.
pub fn ordered_capture_prob(n: u32, r: u32, p: &CaptureParams) -> f64 {
    assert!(r <= n, "r = {r} exceeds n = {n}");
    if r == 0 {
        return 1.0;
    }
    p.ln_ordered(n, r).exp()
}

/// Probability that at least `r` of `n` signals are decoded.
pub fn at_least_r_prob(n: u32, r: u32, p: &CaptureParams) -> f64 {
    assert!(r <= n, "r = {r} exceeds n = {n}");
    if r == 0 {
        return 1.0;
    }
    let ln_perm = ln_factorial(n as u64) - ln_factorial((n - r) as u64);
    (ln_perm + p.ln_ordered(n, r)).exp().min(1.0)
}

/// Expected number of decoded signals out of `n`.
pub fn expected_decoded(n: u32, p: &CaptureParams) -> f64 {
    (1..=n).map(|r| at_least_r_prob(n, r, p)).sum()
}

/// A truncated series value with a bound on the neglected remainder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
    /// Largest `t` included.
    pub last_term: u32,
}

/// Success probability of a packet under `Poisson(rho)` interferers, summed
/// over `t = 0..=last_term` other packets.
pub fn capture_psuc_truncated(rho: f64, p: &CaptureParams, last_term: u32) -> SeriesValue {
    let ln_rho = rho.ln();
    let lb = p.ln_one_plus_b();
    let mut value = 0.0;
    for t in 0..=last_term {
        if rho == 0.0 && t > 0 {
            break;
        }
        let tf = t as f64;
        let base = -rho + if t == 0 { 0.0 } else { tf * ln_rho };
        for tau in 0..=t {
            let tau_f = tau as f64;
            let power = ((tau_f + 1.0) * lb).exp();
            let ln_term = base
                - ln_factorial((t - tau) as u64)
                - (power - 1.0) / p.gamma
                - (tau_f + 1.0) * (tf - tau_f / 2.0) * lb;
            let term = ln_term.exp();
            value += term;
            if term == 0.0 && power.is_infinite() {
                break;
            }
        }
    }
    SeriesValue { value: value.clamp(0.0, 1.0), tail_bound: poisson_tail_bound(rho, last_term as u64 + 1), last_term }
}

/// Like [`capture_psuc`] but also returns the truncation details.
pub fn capture_psuc_series(rho: f64, p: &CaptureParams) -> Result<SeriesValue> {
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::InvalidParameter(format!("offered load {rho} is not a non-negative number")));
    }
    let mut last = 0u32;
    while poisson_tail_bound(rho, last as u64 + 1) > p.tolerance {
        last += 1;
        if last > p.max_terms {
            return Err(Error::Truncation { tolerance: p.tolerance, max_terms: p.max_terms as usize });
        }
    }
    Ok(capture_psuc_truncated(rho, p, last))
}

/// Probability that a packet is decoded when the number of other packets in
/// its slot is `Poisson(rho)`.
pub fn capture_psuc(rho: f64, p: &CaptureParams) -> Result<f64> {
    capture_psuc_series(rho, p).map(|s| s.value)
}

/// Every class sees the capture success probability of the total load.
#[derive(Clone, Debug)]
pub struct RayleighReceiver {
    params: CaptureParams,
    classes: usize,
}

pub fn rayleigh_model(params: CaptureParams, classes: usize) -> Result<RayleighReceiver> {
    params.validate()?;
    if classes == 0 {
        return Err(Error::InvalidParameter("at least one class is required".into()));
    }
    Ok(RayleighReceiver { params, classes })
}

impl RayleighReceiver {
    pub fn params(&self) -> &CaptureParams {
        &self.params
    }
}

impl PoissonReceiver for RayleighReceiver {
    fn dim(&self) -> usize {
        self.classes
    }

    fn success_probabilities(&self, rho: &[f64]) -> Result<Vec<f64>> {
        check_loads(self.classes, rho)?;
        let total: f64 = rho.iter().sum();
        Ok(vec![capture_psuc(total, &self.params)?; self.classes])
    }
}
