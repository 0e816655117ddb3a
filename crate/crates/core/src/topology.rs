//! Binary K x T bi-adjacency matrices linking traffic classes to receivers.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bi-adjacency matrix `H` between `K` external classes (rows) and `T`
/// internal classes or receivers (columns).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u8>>", into = "Vec<Vec<u8>>")]
pub struct BipartiteTopology {
    classes: usize,
    receivers: usize,
    /// `B_k`: receivers reached by class `k`.
    row_sets: Vec<Vec<usize>>,
    /// `C_t`: classes feeding receiver `t`.
    col_sets: Vec<Vec<usize>>,
}

impl BipartiteTopology {
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let classes = rows.len();
        if classes == 0 {
            return Err(Error::InvalidTopology("matrix has no rows".into()));
        }
        let receivers = rows[0].len();
        if receivers == 0 {
            return Err(Error::InvalidTopology("matrix has no columns".into()));
        }
        let mut edges = Vec::new();
        for (k, row) in rows.iter().enumerate() {
            if row.len() != receivers {
                return Err(Error::InvalidTopology(format!(
                    "row {} has {} entries, expected {}",
                    k,
                    row.len(),
                    receivers
                )));
            }
            for (t, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => edges.push((k, t)),
                    other => {
                        return Err(Error::InvalidTopology(format!("entry ({k},{t}) is {other}, expected 0 or 1")))
                    }
                }
            }
        }
        Self::from_edges(classes, receivers, &edges)
    }

    /// Builds `H` from 0-based `(class, receiver)` pairs. Duplicates collapse.
    pub fn from_edges(classes: usize, receivers: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if classes == 0 || receivers == 0 {
            return Err(Error::InvalidTopology("K and T must be at least 1".into()));
        }
        let mut row_sets = vec![Vec::new(); classes];
        let mut col_sets = vec![Vec::new(); receivers];
        for &(k, t) in edges {
            if k >= classes || t >= receivers {
                return Err(Error::InvalidTopology(format!("edge ({k},{t}) outside {classes}x{receivers}")));
            }
            if !row_sets[k].contains(&t) {
                row_sets[k].push(t);
                col_sets[t].push(k);
            }
        }
        row_sets.iter_mut().for_each(|s| s.sort_unstable());
        col_sets.iter_mut().for_each(|s| s.sort_unstable());
        Ok(BipartiteTopology { classes, receivers, row_sets, col_sets })
    }

    /// `[I_K | I_K]`: every class multicast to two receivers holding the same classes.
    pub fn doubled_identity(classes: usize) -> Result<Self> {
        let edges: Vec<_> = (0..classes).flat_map(|k| [(k, k), (k, k + classes)]).collect();
        Self::from_edges(classes, 2 * classes, &edges)
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn receivers(&self) -> usize {
        self.receivers
    }

    pub fn get(&self, k: usize, t: usize) -> bool {
        self.row_sets[k].binary_search(&t).is_ok()
    }

    /// `B_k`, the receivers class `k` is attached to.
    pub fn receivers_of(&self, k: usize) -> &[usize] {
        &self.row_sets[k]
    }

    /// `C_t`, the classes attached to receiver `t`.
    pub fn classes_of(&self, t: usize) -> &[usize] {
        &self.col_sets[t]
    }

    pub fn edge_count(&self) -> usize {
        self.row_sets.iter().map(Vec::len).sum()
    }

    /// Edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_sets.iter().enumerate().flat_map(|(k, ts)| ts.iter().map(move |&t| (k, t)))
    }

    /// Every row has at most one nonzero entry.
    pub fn is_multiplexing_valid(&self) -> bool {
        self.row_sets.iter().all(|s| s.len() <= 1)
    }

    /// Every column has at most one nonzero entry.
    pub fn is_coding_valid(&self) -> bool {
        self.col_sets.iter().all(|s| s.len() <= 1)
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.classes).map(|k| (0..self.receivers).map(|t| u8::from(self.get(k, t))).collect()).collect()
    }

    /// Row-vector product `n H`: the load seen by each receiver.
    pub fn forward(&self, n: &[u32]) -> Vec<u32> {
        self.col_sets.iter().map(|cs| cs.iter().map(|&k| n[k]).sum()).collect()
    }

    /// Integer matrix product `self * other`.
    pub fn product(&self, other: &BipartiteTopology) -> Result<Vec<Vec<u32>>> {
        if self.receivers != other.classes {
            return Err(Error::DimensionMismatch { expected: self.receivers, actual: other.classes });
        }
        let mut out = vec![vec![0u32; other.receivers]; self.classes];
        for (k, row) in out.iter_mut().enumerate() {
            for &e in &self.row_sets[k] {
                for &t in &other.row_sets[e] {
                    row[t] += 1;
                }
            }
        }
        Ok(out)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.to_rows() {
            let cells: Vec<String> = row.iter().map(u8::to_string).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|c| c.trim().parse::<u8>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    /// One `k,t` line per edge, 0-based.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (k, t) in self.edges() {
            let _ = writeln!(out, "{k},{t}");
        }
        out
    }

    pub fn from_edge_list(text: &str, classes: usize, receivers: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            let parse = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse { line: i + 1, message: e.to_string() });
            if parts.len() != 2 {
                return Err(Error::Parse { line: i + 1, message: "expected `k,t`".into() });
            }
            edges.push((parse(parts[0])?, parse(parts[1])?));
        }
        Self::from_edges(classes, receivers, &edges)
    }
}

impl TryFrom<Vec<Vec<u8>>> for BipartiteTopology {
    type Error = Error;
    fn try_from(rows: Vec<Vec<u8>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<BipartiteTopology> for Vec<Vec<u8>> {
    fn from(h: BipartiteTopology) -> Self {
        h.to_rows()
    }
}

/// Factors `H = H1 * H2` through one intermediate node per edge of `H`.
///
/// `H1` (K x E) is a packet-coding matrix and `H2` (E x T) a
/// traffic-multiplexing matrix; edges are numbered in row-major order.
pub fn split_bipartite(h: &BipartiteTopology) -> Result<(BipartiteTopology, BipartiteTopology)> {
    let edges: Vec<(usize, usize)> = h.edges().collect();
    let e = edges.len();
    if e == 0 {
        return Err(Error::InvalidTopology("cannot split a topology without edges".into()));
    }
    let coding: Vec<(usize, usize)> = edges.iter().enumerate().map(|(i, &(k, _))| (k, i)).collect();
    let muxing: Vec<(usize, usize)> = edges.iter().enumerate().map(|(i, &(_, t))| (i, t)).collect();
    Ok((
        BipartiteTopology::from_edges(h.classes(), e, &coding)?,
        BipartiteTopology::from_edges(e, h.receivers(), &muxing)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_receiver_h() -> BipartiteTopology {
        BipartiteTopology::from_rows(&[vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap()
    }

    #[test]
    fn row_and_column_sets() {
        let h = two_receiver_h();
        assert_eq!(h.receivers_of(2), &[0, 1]);
        assert_eq!(h.classes_of(0), &[0, 2]);
        assert!(!h.is_multiplexing_valid());
        assert!(!h.is_coding_valid());
        assert_eq!(h.forward(&[1, 3, 1]), vec![2, 4]);
    }

    #[test]
    fn split_of_two_receiver_system() {
        let (h1, h2) = split_bipartite(&two_receiver_h()).unwrap();
        assert_eq!(h1.to_rows(), vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 1]]);
        assert_eq!(h2.to_rows(), vec![vec![1, 0], vec![0, 1], vec![1, 0], vec![0, 1]]);
        assert!(h1.is_coding_valid());
        assert!(h2.is_multiplexing_valid());
    }

    #[test]
    fn split_of_multiplexing_matrix_keeps_h() {
        let h = BipartiteTopology::from_rows(&[vec![0, 1], vec![1, 0], vec![0, 1]]).unwrap();
        let (h1, h2) = split_bipartite(&h).unwrap();
        assert_eq!(h1.to_rows(), vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(h2, h);
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(BipartiteTopology::from_rows(&[vec![2]]).is_err());
        assert!(BipartiteTopology::from_rows(&[vec![1, 0], vec![1]]).is_err());
        assert!(BipartiteTopology::from_rows(&[]).is_err());
    }

    #[test]
    fn serializations() {
        let h = two_receiver_h();
        assert_eq!(h.to_csv(), "1,0\n0,1\n1,1\n");
        assert_eq!(BipartiteTopology::from_csv(&h.to_csv()).unwrap(), h);
        assert_eq!(h.to_edge_list(), "0,0\n1,1\n2,0\n2,1\n");
        assert_eq!(BipartiteTopology::from_edge_list(&h.to_edge_list(), 3, 2).unwrap(), h);
    }

    fn matrix(max: usize) -> impl Strategy<Value = Vec<Vec<u8>>> {
        (1..=max, 1..=max).prop_flat_map(|(k, t)| prop::collection::vec(prop::collection::vec(0u8..=1, t), k))
    }

    proptest! {
        #[test]
        fn split_multiplies_back(rows in matrix(4)) {
            let h = BipartiteTopology::from_rows(&rows).unwrap();
            prop_assume!(h.edge_count() > 0);
            let (h1, h2) = split_bipartite(&h).unwrap();
            prop_assert!(h1.is_coding_valid());
            prop_assert!(h2.is_multiplexing_valid());
            let prod = h1.product(&h2).unwrap();
            let expect: Vec<Vec<u32>> = rows.iter().map(|r| r.iter().map(|&v| v as u32).collect()).collect();
            prop_assert_eq!(prod, expect);
        }
    }
}
