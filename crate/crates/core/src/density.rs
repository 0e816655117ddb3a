//! Density evolution for packet coding over a Poisson receiver.

use serde::{Deserialize, Serialize};

use crate::degree::DegreeDistribution;
use crate::error::{Error, Result};
use crate::numeric::fmt_sig;
use crate::poisson::PoissonReceiver;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_ITERATIONS: usize = 100;

/// One iteration: `q^(i)` and the success probabilities `P~^(i)` computed
/// from `q^(i-1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeStep {
    pub iteration: usize,
    pub q: Vec<f64>,
    pub success: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeTrace {
    pub steps: Vec<DeStep>,
    pub converged: bool,
}

impl DeTrace {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    /// Success probabilities after the last iteration.
    pub fn final_success(&self) -> &[f64] {
        &self.steps.last().expect("trace has at least one step").success
    }

    pub fn final_error(&self) -> Vec<f64> {
        self.final_success().iter().map(|p| 1.0 - p).collect()
    }

    pub fn to_csv(&self) -> String {
        let k = self.steps.first().map_or(0, |s| s.q.len());
        let mut header = vec!["iteration".to_string()];
        header.extend((1..=k).map(|c| format!("q_{c}")));
        header.extend((1..=k).map(|c| format!("Psuc_{c}")));
        let mut out = header.join(",");
        out.push('\n');
        for s in &self.steps {
            let mut row = vec![s.iteration.to_string()];
            row.extend(s.q.iter().map(|x| fmt_sig(*x)));
            row.extend(s.success.iter().map(|x| fmt_sig(*x)));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn check_unit(values: &[f64]) -> Result<()> {
    for (class, &value) in values.iter().enumerate() {
        if !(value.is_finite() && (-1e-12..=1.0 + 1e-12).contains(&value)) {
            return Err(Error::ProbabilityRange { class, value });
        }
    }
    Ok(())
}

/// Runs the recursion
/// `q^(i) = lambda(1 - P_suc(q^(i-1) . G . Lambda'(1)))` from `q^(0) = 1` and
/// reports `P~^(i) = 1 - Lambda(1 - P_suc(q^(i-1) . G . Lambda'(1)))`.
/// Stops after `max_iterations` or once `max_k |q^(i) - q^(i-1)| < tolerance`.
pub fn density_evolution(
    model: &dyn PoissonReceiver,
    users: &[f64],
    degrees: &[DegreeDistribution],
    max_iterations: usize,
    tolerance: f64,
) -> Result<DeTrace> {
    let k = model.dim();
    if users.len() != k {
        return Err(Error::DimensionMismatch { expected: k, actual: users.len() });
    }
    if degrees.len() != k {
        return Err(Error::DimensionMismatch { expected: k, actual: degrees.len() });
    }
    if users.iter().any(|g| !g.is_finite() || *g < 0.0) {
        return Err(Error::InvalidParameter("user densities must be non-negative".into()));
    }
    if max_iterations == 0 {
        return Err(Error::InvalidParameter("at least one iteration is required".into()));
    }
    let means: Vec<f64> = degrees.iter().map(DegreeDistribution::mean).collect();
    let mut q = vec![1.0; k];
    let mut steps = Vec::new();
    let mut converged = false;
    for iteration in 1..=max_iterations {
        let rho: Vec<f64> = (0..k).map(|c| q[c] * users[c] * means[c]).collect();
        let p = model.success_probabilities(&rho)?;
        check_unit(&p)?;
        let next: Vec<f64> = (0..k).map(|c| degrees[c].edge(1.0 - p[c]).clamp(0.0, 1.0)).collect();
        let success: Vec<f64> = (0..k).map(|c| (1.0 - degrees[c].eval(1.0 - p[c])).clamp(0.0, 1.0)).collect();
        let delta = q.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        q = next;
        steps.push(DeStep { iteration, q: q.clone(), success });
        if delta < tolerance {
            converged = true;
            break;
        }
    }
    Ok(DeTrace { steps, converged })
}
