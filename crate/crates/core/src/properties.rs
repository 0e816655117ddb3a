//! Exhaustive checks of contractivity, failure monotonicity and the
//! all-or-nothing (with on-off) property over a finite box.
//!
//! Monotonicity and the on-off clauses are transitive along chains of unit
//! steps, so checking every covering pair `n <= n + e_j` of the box decides
//! them for all comparable pairs.

use crate::error::{Error, Result};
use crate::evaluator::{Evaluator, Flags};
use crate::load::{LoadVector, VerificationBox};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub lower: LoadVector,
    /// The larger load of a violating pair; `None` for pointwise properties.
    pub upper: Option<LoadVector>,
    pub class: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyReport {
    pub grid_points: u128,
    pub contractive: Option<Violation>,
    pub monotone_failure: Option<Violation>,
    pub all_or_nothing: Option<Violation>,
}

impl PropertyReport {
    pub fn is_contractive(&self) -> bool {
        self.contractive.is_none()
    }

    pub fn is_monotone(&self) -> bool {
        self.contractive.is_none() && self.monotone_failure.is_none()
    }

    pub fn is_all_or_nothing(&self) -> bool {
        self.contractive.is_none() && self.all_or_nothing.is_none()
    }

    pub fn flags(&self) -> Flags {
        Flags { monotone_failure: self.is_monotone(), all_or_nothing: self.is_all_or_nothing() }
    }
}

pub fn verify_properties(f: &Evaluator, grid: &VerificationBox) -> Result<PropertyReport> {
    if f.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), actual: grid.dim() });
    }
    let upper = grid.upper().as_slice().to_vec();
    let points: Vec<LoadVector> = grid.iter().collect();
    let mut report =
        PropertyReport { grid_points: grid.size(), contractive: None, monotone_failure: None, all_or_nothing: None };

    let mut values: Vec<Vec<u32>> = Vec::with_capacity(points.len());
    for n in &points {
        match f.eval_slice(n.as_slice()) {
            Ok(phi) => {
                if report.contractive.is_none() {
                    if let Some(k) = phi.iter().zip(n.as_slice()).position(|(p, x)| p > x) {
                        report.contractive = Some(Violation { lower: n.clone(), upper: None, class: k });
                    }
                }
                values.push(phi);
            }
            Err(Error::NotContractive { output, .. }) => {
                if report.contractive.is_none() {
                    let k = output.iter().zip(n.as_slice()).position(|(p, x)| p > x).unwrap_or(0);
                    report.contractive = Some(Violation { lower: n.clone(), upper: None, class: k });
                }
                values.push(output);
            }
            Err(e) => return Err(e),
        }
    }
    if report.contractive.is_some() {
        return Ok(report);
    }

    for (i, n) in points.iter().enumerate() {
        let phi = &values[i];
        if report.all_or_nothing.is_none() {
            if let Some(k) = (0..n.dim()).find(|&k| phi[k] != 0 && phi[k] != n[k]) {
                report.all_or_nothing = Some(Violation { lower: n.clone(), upper: None, class: k });
            }
        }
        for j in 0..n.dim() {
            if n[j] == upper[j] {
                continue;
            }
            let mut m = n.as_slice().to_vec();
            m[j] += 1;
            let idx = grid.index_of(&m).expect("covering load inside box");
            let psi = &values[idx];
            let bigger = LoadVector::new(m.clone());
            for k in 0..n.dim() {
                let fail_lo = n[k] - phi[k];
                let fail_hi = m[k] - psi[k];
                if report.monotone_failure.is_none() && fail_lo > fail_hi {
                    report.monotone_failure =
                        Some(Violation { lower: n.clone(), upper: Some(bigger.clone()), class: k });
                }
                if report.all_or_nothing.is_none() {
                    let decoded_hi_not_lo = psi[k] == m[k] && phi[k] != n[k];
                    let failed_lo_not_hi = n[k] > 0 && phi[k] == 0 && psi[k] != 0;
                    if decoded_hi_not_lo || failed_lo_not_hi {
                        report.all_or_nothing =
                            Some(Violation { lower: n.clone(), upper: Some(bigger.clone()), class: k });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Verifies `f` over `grid` and returns it carrying the flags that held.
pub fn certify(f: &Evaluator, grid: &VerificationBox) -> Result<(Evaluator, PropertyReport)> {
    let report = verify_properties(f, grid)?;
    Ok((f.with_flags(report.flags()), report))
}
