//! Max-sum message passing over cooperative `D`-fold receivers, and the
//! finite success table it induces.
//!
//! Each pass: every class with residual packets sends its residual count to
//! the receivers it is attached to; a receiver whose incoming sum is at most
//! `D` echoes the messages back, otherwise it returns 0; a class decodes
//! everything it has left iff the largest echo is positive. Passes repeat
//! until one decodes nothing. Classes with no residual packets take no part
//! in messaging or in the termination test.

use crate::error::{Error, Result};
use crate::evaluator::Evaluator;
use crate::load::VerificationBox;
use crate::load::{GridIter, LoadVector};
use crate::properties::certify;
use crate::table::SuccessTable;
use crate::topology::BipartiteTopology;

/// Default cap on the number of equivalence classes tabulated.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 10_000_000;

/// Residual loads after one pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxSumState {
    pub iteration: usize,
    pub residual: LoadVector,
    /// `returns[k][i]`: echo class `k` received from its `i`-th receiver in `B_k`.
    pub returns: Vec<Vec<u32>>,
}

/// Runs the passes and returns every intermediate state, starting with the
/// input load at iteration 0.
pub fn max_sum_trace(h: &BipartiteTopology, d: u32, n: &LoadVector) -> Result<Vec<MaxSumState>> {
    if n.dim() != h.classes() {
        return Err(Error::DimensionMismatch { expected: h.classes(), actual: n.dim() });
    }
    if d == 0 {
        return Err(Error::InvalidParameter("D must be at least 1".into()));
    }
    let mut residual = n.as_slice().to_vec();
    let mut states = vec![MaxSumState { iteration: 0, residual: n.clone(), returns: vec![Vec::new(); h.classes()] }];
    for iteration in 1.. {
        // receiver -> class echoes
        let accepts: Vec<bool> = (0..h.receivers())
            .map(|t| h.classes_of(t).iter().map(|&k| residual[k] as u64).sum::<u64>() <= d as u64)
            .collect();
        let returns: Vec<Vec<u32>> = (0..h.classes())
            .map(|k| {
                if residual[k] == 0 {
                    return Vec::new();
                }
                h.receivers_of(k).iter().map(|&t| if accepts[t] { residual[k] } else { 0 }).collect()
            })
            .collect();
        let mut progressed = false;
        for (k, echoes) in returns.iter().enumerate() {
            if echoes.iter().copied().max().unwrap_or(0) > 0 {
                residual[k] = 0;
                progressed = true;
            }
        }
        states.push(MaxSumState { iteration, residual: LoadVector::new(residual.clone()), returns });
        if !progressed {
            break;
        }
    }
    Ok(states)
}

/// `phi(n) = n - n^(final)` for `T` cooperative `D`-fold receivers wired by `H`.
pub fn max_sum_decode(h: &BipartiteTopology, d: u32, n: &LoadVector) -> Result<LoadVector> {
    let states = max_sum_trace(h, d, n)?;
    let last = &states.last().expect("trace is never empty").residual;
    Ok(n.checked_sub(last).expect("residual never exceeds the load"))
}

/// All loads with every class in `0..=D+1`, in lexicographic order.
pub fn enumerate_classes(k: usize, d: u32, limit: u128) -> Result<GridIter> {
    if k == 0 || d == 0 {
        return Err(Error::InvalidParameter("need K >= 1 and D >= 1".into()));
    }
    let count = (d as u128 + 2).checked_pow(k as u32).unwrap_or(u128::MAX);
    if count > limit {
        return Err(Error::EnumerationLimit { requested: count, limit });
    }
    Ok(GridIter::new(vec![d + 1; k]))
}

/// Saturating table of [`max_sum_decode`] over the `(D+2)^K` equivalence
/// classes, with its flags verified on the table box.
pub fn build_success_table(h: &BipartiteTopology, d: u32) -> Result<Evaluator> {
    build_success_table_with_limit(h, d, DEFAULT_ENUMERATION_LIMIT)
}

pub fn build_success_table_with_limit(h: &BipartiteTopology, d: u32, limit: u128) -> Result<Evaluator> {
    let k = h.classes();
    let loads = enumerate_classes(k, d, limit)?;
    let rows = loads.map(|n| max_sum_decode(h, d, &n)).collect::<Result<Vec<_>>>()?;
    let table = SuccessTable::from_rows(vec![d + 1; k], true, &rows)?;
    let f = Evaluator::from_table(table);
    let (f, _) = certify(&f, &VerificationBox::cube(k, d + 1)?)?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_receivers() -> BipartiteTopology {
        BipartiteTopology::from_rows(&[vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap()
    }

    fn decode(n: [u32; 3]) -> Vec<u32> {
        max_sum_decode(&two_receivers(), 2, &LoadVector::from(n)).unwrap().into_inner()
    }

    #[test]
    fn table_rows() {
        assert_eq!(decode([1, 3, 1]), vec![1, 0, 1]);
        assert_eq!(decode([0, 0, 0]), vec![0, 0, 0]);
        assert_eq!(decode([0, 1, 2]), vec![0, 1, 2]);
        assert_eq!(decode([2, 2, 1]), vec![0, 0, 0]);
    }

    #[test]
    fn sic_frees_second_receiver() {
        let states = max_sum_trace(&two_receivers(), 2, &LoadVector::from([0, 1, 2])).unwrap();
        // receiver 1 sees 2 and decodes class 3; receiver 2 then sees only class 2
        assert_eq!(states[1].residual, LoadVector::from([0, 1, 0]));
        assert_eq!(states[2].residual, LoadVector::from([0, 0, 0]));
        for w in states.windows(2) {
            assert!(w[1].residual.le(&w[0].residual));
        }
    }

    #[test]
    fn enumeration() {
        assert_eq!(enumerate_classes(3, 2, DEFAULT_ENUMERATION_LIMIT).unwrap().count(), 64);
        let small: Vec<_> = enumerate_classes(1, 1, 10).unwrap().map(|n| n.into_inner()).collect();
        assert_eq!(small, vec![vec![0], vec![1], vec![2]]);
        assert!(matches!(enumerate_classes(8, 3, 1000), Err(Error::EnumerationLimit { .. })));
    }

    #[test]
    fn clamped_loads_are_equivalent() {
        assert_eq!(decode([5, 0, 0]), decode([3, 0, 0]));
        let t = build_success_table(&two_receivers(), 2).unwrap();
        assert_eq!(t.eval_slice(&[5, 0, 1]).unwrap(), decode([5, 0, 1]));
    }

    #[test]
    fn single_receiver_table_is_slotted_aloha() {
        let h = BipartiteTopology::from_rows(&[vec![1]]).unwrap();
        let t = build_success_table(&h, 1).unwrap();
        let csv = t.table().unwrap().to_csv();
        assert_eq!(csv, "n_1,phi_1\n0,0\n1,1\n2,0\n");
        assert!(t.flags().all_or_nothing);
    }

    #[test]
    fn empty_receiver_column_is_vacuous() {
        let h = BipartiteTopology::from_rows(&[vec![1, 0]]).unwrap();
        assert_eq!(max_sum_decode(&h, 1, &LoadVector::from([1])).unwrap(), LoadVector::from([1]));
        assert_eq!(max_sum_decode(&h, 1, &LoadVector::from([2])).unwrap(), LoadVector::from([0]));
    }
}
