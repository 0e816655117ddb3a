//! Degree distributions `Lambda(x) = sum_l Lambda_l x^l` of replica counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probabilities `Lambda_l` that a user sends `l` replicas, finite support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DegreeDistribution {
    coefficients: Vec<f64>,
}

impl DegreeDistribution {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidDegree("no coefficients".into()));
        }
        if coefficients.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidDegree("coefficients must be finite and non-negative".into()));
        }
        let total: f64 = coefficients.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDegree(format!("coefficients sum to {total}, not 1")));
        }
        Ok(DegreeDistribution { coefficients })
    }

    /// `Lambda(x) = x^L`: every user sends exactly `L` replicas.
    pub fn regular(l: usize) -> Self {
        let mut coefficients = vec![0.0; l + 1];
        coefficients[l] = 1.0;
        DegreeDistribution { coefficients }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn max_degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `Lambda(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// `Lambda'(x)`.
    pub fn derivative(&self, x: f64) -> f64 {
        self.coefficients.iter().enumerate().skip(1).rev().fold(0.0, |acc, (l, c)| acc * x + l as f64 * c)
    }

    /// `Lambda'(1)`, the mean number of replicas.
    pub fn mean(&self) -> f64 {
        self.derivative(1.0)
    }

    /// Edge-perspective distribution `lambda(x) = Lambda'(x) / Lambda'(1)`;
    /// identically zero when no replicas are ever sent.
    pub fn edge(&self, x: f64) -> f64 {
        let mean = self.mean();
        if mean == 0.0 {
            0.0
        } else {
            self.derivative(x) / mean
        }
    }
}

impl TryFrom<Vec<f64>> for DegreeDistribution {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<DegreeDistribution> for Vec<f64> {
    fn from(d: DegreeDistribution) -> Self {
        d.coefficients
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_distribution_identities() {
        for l in 1..=8usize {
            let d = DegreeDistribution::regular(l);
            assert_eq!(d.mean(), l as f64);
            for x in [0.0, 0.25, 0.5, 0.9, 1.0] {
                assert!((d.eval(x) - x.powi(l as i32)).abs() < 1e-15);
                assert!((d.edge(x) - x.powi(l as i32 - 1)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn validation() {
        assert!(DegreeDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(DegreeDistribution::new(vec![-0.5, 1.5]).is_err());
        assert!(DegreeDistribution::new(vec![]).is_err());
        let d = DegreeDistribution::new(vec![0.0, 0.5, 0.0, 0.5]).unwrap();
        assert_eq!(d.mean(), 2.0);
        assert!((d.edge(0.5) - (0.5 + 1.5 * 0.25) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_degree_has_no_edges() {
        let d = DegreeDistribution::regular(0);
        assert_eq!(d.mean(), 0.0);
        assert_eq!(d.edge(0.3), 0.0);
    }
}
