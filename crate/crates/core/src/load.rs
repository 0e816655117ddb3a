//! Deterministic loads and finite verification boxes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of packets offered per traffic class.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LoadVector(Vec<u32>);

impl LoadVector {
    pub fn new(counts: Vec<u32>) -> Self {
        LoadVector(counts)
    }

    pub fn zeros(dim: usize) -> Self {
        LoadVector(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&c| c as u64).sum()
    }

    /// Componentwise partial order.
    pub fn le(&self, other: &LoadVector) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `self - other`; requires `other <= self`.
    pub fn checked_sub(&self, other: &LoadVector) -> Option<LoadVector> {
        if self.dim() != other.dim() {
            return None;
        }
        self.0.iter().zip(&other.0).map(|(a, b)| a.checked_sub(*b)).collect::<Option<Vec<_>>>().map(LoadVector)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl From<Vec<u32>> for LoadVector {
    fn from(v: Vec<u32>) -> Self {
        LoadVector(v)
    }
}

impl<const N: usize> From<[u32; N]> for LoadVector {
    fn from(v: [u32; N]) -> Self {
        LoadVector(v.to_vec())
    }
}

impl std::ops::Index<usize> for LoadVector {
    type Output = u32;
    fn index(&self, i: usize) -> &u32 {
        &self.0[i]
    }
}

impl fmt::Debug for LoadVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for LoadVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The finite grid `{0..u_1} x ... x {0..u_K}` used for exhaustive checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationBox {
    upper: LoadVector,
}

impl VerificationBox {
    pub fn new(upper: impl Into<LoadVector>) -> Result<Self> {
        let upper = upper.into();
        if upper.dim() == 0 {
            return Err(Error::InvalidParameter("verification box needs K >= 1".into()));
        }
        Ok(VerificationBox { upper })
    }

    /// Box `{0..side}^dim`.
    pub fn cube(dim: usize, side: u32) -> Result<Self> {
        Self::new(LoadVector::new(vec![side; dim]))
    }

    pub fn upper(&self) -> &LoadVector {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.upper.dim()
    }

    /// Number of grid points, `prod(u_k + 1)`.
    pub fn size(&self) -> u128 {
        self.upper.as_slice().iter().map(|&u| u as u128 + 1).product()
    }

    /// Lexicographic iteration over the grid (last coordinate fastest).
    pub fn iter(&self) -> GridIter {
        GridIter::new(self.upper.as_slice().to_vec())
    }

    /// Position of `n` in lexicographic order, if inside the box.
    pub fn index_of(&self, n: &[u32]) -> Option<usize> {
        if n.len() != self.dim() {
            return None;
        }
        let mut idx = 0usize;
        for (&c, &u) in n.iter().zip(self.upper.as_slice()) {
            if c > u {
                return None;
            }
            idx = idx * (u as usize + 1) + c as usize;
        }
        Some(idx)
    }
}

/// Odometer over `{0..u_1} x ... x {0..u_K}`.
#[derive(Clone, Debug)]
pub struct GridIter {
    upper: Vec<u32>,
    next: Option<Vec<u32>>,
}

impl GridIter {
    pub fn new(upper: Vec<u32>) -> Self {
        let next = Some(vec![0; upper.len()]);
        GridIter { upper, next }
    }
}

impl Iterator for GridIter {
    type Item = LoadVector;

    fn next(&mut self) -> Option<LoadVector> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut k = succ.len();
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            if succ[k] < self.upper[k] {
                succ[k] += 1;
                self.next = Some(succ);
                break;
            }
            succ[k] = 0;
        }
        Some(LoadVector(current))
    }
}
