//! Poisson receivers: success probabilities under independent Poisson offered
//! loads, induced from ALOHA receivers, with packet routing and throughput.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::Evaluator;
use crate::load::GridIter;
use crate::numeric::{poisson_pmf, poisson_pmf_over_rate, poisson_series_from, poisson_tail_bound};

/// A map from mean offered loads `rho` to per-class success probabilities.
pub trait PoissonReceiver: Send + Sync {
    fn dim(&self) -> usize;

    /// `P_suc,k(rho)` for every class `k`.
    fn success_probabilities(&self, rho: &[f64]) -> Result<Vec<f64>>;
}

pub type SharedReceiver = Arc<dyn PoissonReceiver>;

/// Expected number of decoded packets per class, `S_k = rho_k P_suc,k(rho)`.
pub fn throughput(model: &dyn PoissonReceiver, rho: &[f64]) -> Result<Vec<f64>> {
    let p = model.success_probabilities(rho)?;
    Ok(rho.iter().zip(p).map(|(r, p)| r * p).collect())
}

pub(crate) fn check_loads(dim: usize, rho: &[f64]) -> Result<()> {
    if rho.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, actual: rho.len() });
    }
    if let Some(bad) = rho.iter().find(|r| !r.is_finite() || **r < 0.0) {
        return Err(Error::InvalidParameter(format!("offered load {bad} is not a non-negative number")));
    }
    Ok(())
}

/// How the sum over Poisson arrival vectors is carried out.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InduceMode {
    /// Exact evaluation for a saturating table with cap `d + 1` in every class:
    /// all counts above `d` are lumped into the class `d + 1`.
    ExactSaturating { d: u32 },
    /// Sum over a box chosen so that the neglected mass is at most
    /// `tolerance`; fails if a class would need more than `max_terms` counts.
    Truncated { max_terms: u32, tolerance: f64 },
}

/// One row of summation weights per class.
type Grid = Vec<Vec<f64>>;

/// A Poisson receiver induced by an ALOHA receiver.
#[derive(Clone)]
pub struct InducedReceiver {
    phi: Evaluator,
    mode: InduceMode,
}

impl fmt::Debug for InducedReceiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InducedReceiver").field("phi", &self.phi).field("mode", &self.mode).finish()
    }
}

pub fn induce(phi: &Evaluator, mode: InduceMode) -> Result<InducedReceiver> {
    match mode {
        InduceMode::ExactSaturating { d } => {
            let table = phi
                .table()
                .ok_or_else(|| Error::InvalidParameter("exact induction needs a tabulated receiver".into()))?;
            if !table.is_saturating() {
                return Err(Error::InvalidParameter("exact induction needs a saturating table".into()));
            }
            if table.cap().as_slice().iter().any(|&c| c != d + 1) {
                return Err(Error::InvalidParameter(format!(
                    "exact induction with D = {d} needs cap {} in every class, table has {}",
                    d + 1,
                    table.cap()
                )));
            }
        }
        InduceMode::Truncated { max_terms, tolerance } => {
            if !(tolerance > 0.0 && tolerance < 1.0) {
                return Err(Error::InvalidParameter(format!("tolerance {tolerance} must lie in (0, 1)")));
            }
            if max_terms == 0 {
                return Err(Error::InvalidParameter("max_terms must be positive".into()));
            }
        }
    }
    Ok(InducedReceiver { phi: phi.clone(), mode })
}

impl InducedReceiver {
    pub fn mode(&self) -> InduceMode {
        self.mode
    }

    /// Per-class weights `(P(n_k = m), P(n_k = m) / rho_k)` on the summation grid.
    fn weights(&self, rho: &[f64]) -> Result<(Grid, Grid)> {
        let k = rho.len();
        let mut mass = Vec::with_capacity(k);
        let mut biased = Vec::with_capacity(k);
        match self.mode {
            InduceMode::ExactSaturating { d } => {
                for &r in rho {
                    let mut h: Vec<f64> = (0..=d as u64).map(|m| poisson_pmf(r, m)).collect();
                    let mut g: Vec<f64> = (0..=d as u64).map(|m| poisson_pmf_over_rate(r, m)).collect();
                    let tail = if r == 0.0 { 0.0 } else { poisson_series_from(r, d as u64 + 1, |m| poisson_pmf(r, m)) };
                    let tail_over_rate = poisson_series_from(r, d as u64 + 1, |m| poisson_pmf_over_rate(r, m));
                    h.push(tail);
                    g.push(tail_over_rate);
                    mass.push(h);
                    biased.push(g);
                }
            }
            InduceMode::Truncated { max_terms, tolerance } => {
                let share = tolerance / k as f64;
                for &r in rho {
                    let mut n = 1u64;
                    while poisson_tail_bound(r, n) > share {
                        n += 1;
                        if n > max_terms as u64 {
                            return Err(Error::Truncation { tolerance, max_terms: max_terms as usize });
                        }
                    }
                    // Counts 0..=n are kept. Dropping counts above n costs at
                    // most P(n_k >= n) in the own class (size-biased) and
                    // P(n_k > n) in every other class.
                    mass.push((0..=n).map(|m| poisson_pmf(r, m)).collect());
                    biased.push((0..=n).map(|m| poisson_pmf_over_rate(r, m)).collect());
                }
            }
        }
        Ok((mass, biased))
    }
}

impl PoissonReceiver for InducedReceiver {
    fn dim(&self) -> usize {
        self.phi.dim()
    }

    fn success_probabilities(&self, rho: &[f64]) -> Result<Vec<f64>> {
        let k = self.dim();
        check_loads(k, rho)?;
        let (mass, biased) = self.weights(rho)?;
        let upper: Vec<u32> = mass.iter().map(|w| w.len() as u32 - 1).collect();
        let mut out = vec![0.0; k];
        for n in GridIter::new(upper) {
            let n = n.as_slice();
            let phi = self.phi.eval_slice(n)?;
            if phi.iter().all(|&x| x == 0) {
                continue;
            }
            for c in 0..k {
                if phi[c] == 0 {
                    continue;
                }
                let mut w = phi[c] as f64 * biased[c][n[c] as usize];
                for l in 0..k {
                    if l != c {
                        w *= mass[l][n[l] as usize];
                    }
                }
                out[c] += w;
            }
        }
        for p in &mut out {
            *p = p.clamp(0.0, 1.0);
        }
        Ok(out)
    }
}

/// A Poisson receiver given directly by a closed-form rule.
pub struct FnReceiver<F> {
    dim: usize,
    rule: F,
}

impl<F> FnReceiver<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(dim: usize, rule: F) -> Self {
        FnReceiver { dim, rule }
    }
}

impl<F> PoissonReceiver for FnReceiver<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn success_probabilities(&self, rho: &[f64]) -> Result<Vec<f64>> {
        check_loads(self.dim, rho)?;
        let p = (self.rule)(rho);
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: p.len() });
        }
        Ok(p)
    }
}

/// A receiver seen through a routing matrix: external class `k1` sends a
/// fraction `r[k1][k2]` of its packets as internal class `k2`.
#[derive(Clone)]
pub struct RoutedReceiver {
    inner: SharedReceiver,
    routing: Vec<Vec<f64>>,
}

pub fn route(model: SharedReceiver, routing: Vec<Vec<f64>>) -> Result<RoutedReceiver> {
    let k2 = model.dim();
    if routing.is_empty() {
        return Err(Error::InvalidParameter("routing matrix has no rows".into()));
    }
    for row in &routing {
        if row.len() != k2 {
            return Err(Error::DimensionMismatch { expected: k2, actual: row.len() });
        }
        if row.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidParameter("routing entries must be non-negative".into()));
        }
        let sum: f64 = row.iter().sum();
        if sum > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!("routing row sums to {sum} > 1")));
        }
    }
    Ok(RoutedReceiver { inner: model, routing })
}

impl RoutedReceiver {
    /// Internal offered load `rho = G R`.
    pub fn internal_load(&self, g: &[f64]) -> Vec<f64> {
        let k2 = self.inner.dim();
        let mut rho = vec![0.0; k2];
        for (gk, row) in g.iter().zip(&self.routing) {
            for (r, w) in rho.iter_mut().zip(row) {
                *r += gk * w;
            }
        }
        rho
    }
}

impl PoissonReceiver for RoutedReceiver {
    fn dim(&self) -> usize {
        self.routing.len()
    }

    fn success_probabilities(&self, g: &[f64]) -> Result<Vec<f64>> {
        check_loads(self.dim(), g)?;
        let p = self.inner.success_probabilities(&self.internal_load(g))?;
        Ok(self.routing.iter().map(|row| row.iter().zip(&p).map(|(r, p)| r * p).sum()).collect())
    }
}
