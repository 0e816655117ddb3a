//! Finite lookup tables for success functions and their CSV layout.
//!
//! The CSV layout is one header line `n_1,...,n_K,phi_1,...,phi_K` followed
//! by one row per load of the box `{0..cap_1} x ... x {0..cap_K}` in
//! lexicographic order (last class fastest).

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::load::{LoadVector, VerificationBox};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuccessTable {
    grid: VerificationBox,
    saturating: bool,
    values: Vec<u32>,
}

impl SuccessTable {
    /// Builds a table by evaluating `f` at every load of the box `{0..cap}`.
    pub fn tabulate<F>(cap: impl Into<LoadVector>, saturating: bool, mut f: F) -> Result<Self>
    where
        F: FnMut(&LoadVector) -> Result<LoadVector>,
    {
        let grid = VerificationBox::new(cap)?;
        let dim = grid.dim();
        let mut values = Vec::with_capacity(grid.size() as usize * dim);
        for n in grid.iter() {
            let phi = f(&n)?;
            check_row(&n, &phi)?;
            values.extend_from_slice(phi.as_slice());
        }
        Ok(SuccessTable { grid, saturating, values })
    }

    /// Builds a table from rows listed in lexicographic order.
    pub fn from_rows(cap: impl Into<LoadVector>, saturating: bool, rows: &[LoadVector]) -> Result<Self> {
        let grid = VerificationBox::new(cap)?;
        if rows.len() as u128 != grid.size() {
            return Err(Error::InvalidParameter(format!("table needs {} rows, got {}", grid.size(), rows.len())));
        }
        let mut it = rows.iter();
        Self::tabulate(grid.upper().clone(), saturating, |_| Ok(it.next().unwrap().clone()))
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn cap(&self) -> &LoadVector {
        self.grid.upper()
    }

    pub fn is_saturating(&self) -> bool {
        self.saturating
    }

    pub fn with_saturation(mut self, saturating: bool) -> Self {
        self.saturating = saturating;
        self
    }

    pub fn grid(&self) -> &VerificationBox {
        &self.grid
    }

    /// Looks up `phi(n)`; saturating tables clamp each class to its cap.
    pub fn lookup(&self, n: &[u32]) -> Result<Vec<u32>> {
        let dim = self.dim();
        if n.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: n.len() });
        }
        let idx = match self.grid.index_of(n) {
            Some(i) => i,
            None if self.saturating => {
                let clamped: Vec<u32> = n.iter().zip(self.cap().as_slice()).map(|(&c, &m)| c.min(m)).collect();
                self.grid.index_of(&clamped).expect("clamped load lies in the box")
            }
            None => return Err(Error::OutOfDomain { load: n.to_vec(), cap: self.cap().as_slice().to_vec() }),
        };
        Ok(self.values[idx * dim..(idx + 1) * dim].to_vec())
    }

    /// Iterates `(n, phi(n))` over the box in lexicographic order.
    pub fn rows(&self) -> impl Iterator<Item = (LoadVector, LoadVector)> + '_ {
        let dim = self.dim();
        self.grid.iter().zip(self.values.chunks(dim)).map(|(n, phi)| (n, LoadVector::new(phi.to_vec())))
    }

    pub fn to_csv(&self) -> String {
        let dim = self.dim();
        let mut out = String::new();
        let header: Vec<String> =
            (1..=dim).map(|k| format!("n_{k}")).chain((1..=dim).map(|k| format!("phi_{k}"))).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for (n, phi) in self.rows() {
            let cells: Vec<String> = n.as_slice().iter().chain(phi.as_slice()).map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// Parses the CSV layout written by [`SuccessTable::to_csv`]. The cap is
    /// inferred from the largest load per class; rows must cover the whole
    /// box in lexicographic order.
    pub fn from_csv(text: &str, saturating: bool) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, message: "empty table".into() })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if !cols.len().is_multiple_of(2) || cols.is_empty() {
            return Err(Error::Parse { line: 1, message: "header must have 2K columns".into() });
        }
        let dim = cols.len() / 2;
        for (i, c) in cols.iter().enumerate() {
            let want = if i < dim { format!("n_{}", i + 1) } else { format!("phi_{}", i - dim + 1) };
            if *c != want {
                return Err(Error::Parse { line: 1, message: format!("expected column {want}, found {c}") });
            }
        }
        let mut loads = Vec::new();
        let mut outputs = Vec::new();
        for (lineno, line) in lines {
            let cells = line
                .split(',')
                .map(|c| c.trim().parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { line: lineno + 1, message: e.to_string() })?;
            if cells.len() != 2 * dim {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected {} cells, found {}", 2 * dim, cells.len()),
                });
            }
            loads.push(LoadVector::new(cells[..dim].to_vec()));
            outputs.push(LoadVector::new(cells[dim..].to_vec()));
        }
        let cap: Vec<u32> = (0..dim).map(|k| loads.iter().map(|n| n[k]).max().unwrap_or(0)).collect();
        let grid = VerificationBox::new(cap.clone())?;
        if loads.len() as u128 != grid.size() || !grid.iter().zip(&loads).all(|(a, b)| &a == b) {
            return Err(Error::Parse {
                line: 2,
                message: "rows must enumerate the full box in lexicographic order".into(),
            });
        }
        Self::from_rows(cap, saturating, &outputs)
    }
}

fn check_row(n: &LoadVector, phi: &LoadVector) -> Result<()> {
    if phi.dim() != n.dim() {
        return Err(Error::DimensionMismatch { expected: n.dim(), actual: phi.dim() });
    }
    if !phi.le(n) {
        return Err(Error::NotContractive { load: n.as_slice().to_vec(), output: phi.as_slice().to_vec() });
    }
    Ok(())
}
