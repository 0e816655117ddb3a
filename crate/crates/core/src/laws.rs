//! Executable forms of the algebraic laws of increasing contractive functions
//! under minimum, composition and closure, plus a generator of random
//! increasing tables to exercise them.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::evaluator::Evaluator;
use crate::load::{LoadVector, VerificationBox};
use crate::properties::verify_properties;
use crate::receivers::cooperative;
use crate::table::SuccessTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Law {
    MinimumCommutative,
    MinimumAssociative,
    MinimumIdempotent,
    ComposeAssociative,
    IdentityElement,
    /// `f ^ g` and `f o g` stay increasing.
    IncreasingClosed,
    /// `f1 <= f2, g1 <= g2` implies `f1 ^ g1 <= f2 ^ g2` and `f1 o g1 <= f2 o g2`.
    OperationsMonotone,
    /// `f <= g` implies `f* <= g*`.
    ClosureMonotone,
    /// `f o f* = f* o f = f*`.
    ClosureAbsorbs,
    /// `f* o f* = f*`.
    ClosureComposeIdempotent,
    /// `(f*)* = f*`.
    ClosureIdempotent,
    /// `(f o g)* = (g o f)*`.
    ClosureSwap,
    /// `(f o g)* = (f* o g*)*`.
    ClosureOfClosures,
    /// `(f o g)* = (f ^ g)*`.
    ClosureMinimum,
    /// Cooperative decoding does not depend on which receiver goes first,
    /// and the result has a monotone failure function.
    CooperativeOrder,
}

impl Law {
    pub const ALL: [Law; 15] = [
        Law::MinimumCommutative,
        Law::MinimumAssociative,
        Law::MinimumIdempotent,
        Law::ComposeAssociative,
        Law::IdentityElement,
        Law::IncreasingClosed,
        Law::OperationsMonotone,
        Law::ClosureMonotone,
        Law::ClosureAbsorbs,
        Law::ClosureComposeIdempotent,
        Law::ClosureIdempotent,
        Law::ClosureSwap,
        Law::ClosureOfClosures,
        Law::ClosureMinimum,
        Law::CooperativeOrder,
    ];
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Law::MinimumCommutative => "f ^ g = g ^ f",
            Law::MinimumAssociative => "(f ^ g) ^ h = f ^ (g ^ h)",
            Law::MinimumIdempotent => "f ^ f = f",
            Law::ComposeAssociative => "(f o g) o h = f o (g o h)",
            Law::IdentityElement => "f o e = e o f = f ^ e = f",
            Law::IncreasingClosed => "f ^ g and f o g are increasing",
            Law::OperationsMonotone => "f1 <= f2, g1 <= g2 => f1 ^ g1 <= f2 ^ g2, f1 o g1 <= f2 o g2",
            Law::ClosureMonotone => "f <= g => f* <= g*",
            Law::ClosureAbsorbs => "f o f* = f* o f = f*",
            Law::ClosureComposeIdempotent => "f* o f* = f*",
            Law::ClosureIdempotent => "(f*)* = f*",
            Law::ClosureSwap => "(f o g)* = (g o f)*",
            Law::ClosureOfClosures => "(f o g)* = (f* o g*)*",
            Law::ClosureMinimum => "(f o g)* = (f ^ g)*",
            Law::CooperativeOrder => "cooperative(phi, psi) = cooperative(psi, phi), monotone",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawViolation {
    pub law: Law,
    pub load: LoadVector,
    pub left: Vec<u32>,
    pub right: Vec<u32>,
}

impl fmt::Display for LawViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fails at n = {}: {:?} vs {:?}", self.law, self.load, self.left, self.right)
    }
}

/// Largest `m <= n` with one coordinate lowered by one, for each coordinate.
fn lower_neighbours(n: &[u32]) -> impl Iterator<Item = Vec<u32>> + '_ {
    (0..n.len()).filter(move |&j| n[j] > 0).map(move |j| {
        let mut m = n.to_vec();
        m[j] -= 1;
        m
    })
}

fn le(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Whether `f(n') <= f(n'')` for all `n' <= n''` in the box, checked on
/// covering pairs.
pub fn is_increasing(f: &Evaluator, grid: &VerificationBox) -> Result<bool> {
    for n in grid.iter() {
        let hi = f.eval_slice(n.as_slice())?;
        for m in lower_neighbours(n.as_slice()) {
            if !le(&f.eval_slice(&m)?, &hi) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Checks every [`Law`] pointwise on `grid` for the increasing contractive
/// functions `f`, `g`, `h`. The smaller functions needed by the monotone
/// laws are `f ^ h <= f` and `g ^ h <= g`. Returns every violation found
/// (at most one per law).
pub fn check_laws(f: &Evaluator, g: &Evaluator, h: &Evaluator, grid: &VerificationBox) -> Result<Vec<LawViolation>> {
    let dim = grid.dim();
    for e in [f, g, h] {
        if e.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: e.dim() });
        }
    }
    let eps = Evaluator::identity(dim);
    let f_lo = f.minimum(h)?;
    let g_lo = g.minimum(h)?;
    let f_star = f.closure();
    let g_star = g.closure();
    let fg = f.compose(g)?;
    let gf = g.compose(f)?;
    let fg_star = fg.closure();
    let f_and_g = f.minimum(g)?;

    // Each law is a list of (left, right, relation) checks.
    enum Rel {
        Eq,
        Le,
    }
    let checks: Vec<(Law, Evaluator, Evaluator, Rel)> = vec![
        (Law::MinimumCommutative, f_and_g.clone(), g.minimum(f)?, Rel::Eq),
        (Law::MinimumAssociative, f_and_g.minimum(h)?, f.minimum(&g.minimum(h)?)?, Rel::Eq),
        (Law::MinimumIdempotent, f.minimum(f)?, f.clone(), Rel::Eq),
        (Law::ComposeAssociative, fg.compose(h)?, f.compose(&g.compose(h)?)?, Rel::Eq),
        (Law::IdentityElement, f.compose(&eps)?, f.clone(), Rel::Eq),
        (Law::IdentityElement, eps.compose(f)?, f.clone(), Rel::Eq),
        (Law::IdentityElement, f.minimum(&eps)?, f.clone(), Rel::Eq),
        (Law::OperationsMonotone, f_lo.minimum(&g_lo)?, f_and_g.clone(), Rel::Le),
        (Law::OperationsMonotone, f_lo.compose(&g_lo)?, fg.clone(), Rel::Le),
        (Law::ClosureMonotone, f_lo.closure(), f_star.clone(), Rel::Le),
        (Law::ClosureAbsorbs, f.compose(&f_star)?, f_star.clone(), Rel::Eq),
        (Law::ClosureAbsorbs, f_star.compose(f)?, f_star.clone(), Rel::Eq),
        (Law::ClosureComposeIdempotent, f_star.compose(&f_star)?, f_star.clone(), Rel::Eq),
        (Law::ClosureIdempotent, f_star.closure(), f_star.clone(), Rel::Eq),
        (Law::ClosureSwap, fg_star.clone(), gf.closure(), Rel::Eq),
        (Law::ClosureOfClosures, fg_star.clone(), f_star.compose(&g_star)?.closure(), Rel::Eq),
        (Law::ClosureMinimum, fg_star.clone(), f_and_g.closure(), Rel::Eq),
    ];

    // Receivers whose failure functions are f and g.
    let phi = f.complement();
    let psi = g.complement();
    let coop_ab = cooperative(&phi, &psi)?;
    let coop_ba = cooperative(&psi, &phi)?;

    let mut violations: Vec<LawViolation> = Vec::new();
    let mut record = |v: LawViolation| {
        if !violations.iter().any(|w| w.law == v.law) {
            violations.push(v);
        }
    };

    for n in grid.iter() {
        for (law, left, right, rel) in &checks {
            let a = left.eval_slice(n.as_slice())?;
            let b = right.eval_slice(n.as_slice())?;
            let ok = match rel {
                Rel::Eq => a == b,
                Rel::Le => le(&a, &b),
            };
            if !ok {
                record(LawViolation { law: *law, load: n.clone(), left: a, right: b });
            }
        }
        let a = coop_ab.eval_slice(n.as_slice())?;
        let b = coop_ba.eval_slice(n.as_slice())?;
        if a != b {
            record(LawViolation { law: Law::CooperativeOrder, load: n.clone(), left: a, right: b });
        }
    }

    for candidate in [&f_and_g, &fg] {
        if !is_increasing(candidate, grid)? {
            record(LawViolation {
                law: Law::IncreasingClosed,
                load: grid.upper().clone(),
                left: Vec::new(),
                right: Vec::new(),
            });
        }
    }
    let report = verify_properties(&coop_ab, grid)?;
    if let Some(v) = report.monotone_failure.or(report.contractive) {
        record(LawViolation { law: Law::CooperativeOrder, load: v.lower, left: Vec::new(), right: Vec::new() });
    }
    Ok(violations)
}

/// A random increasing contractive table on `{0..cap}`: the prefix maximum
/// over the grid of sparse random values `r(m) <= m`.
pub fn random_increasing_table<R: Rng + ?Sized>(rng: &mut R, cap: &LoadVector) -> Result<Evaluator> {
    let grid = VerificationBox::new(cap.clone())?;
    let dim = grid.dim();
    let points: Vec<LoadVector> = grid.iter().collect();
    let mut values: Vec<Vec<u32>> = Vec::with_capacity(points.len());
    for n in &points {
        let mut v: Vec<u32> =
            n.as_slice().iter().map(|&x| if rng.random_bool(0.3) { rng.random_range(0..=x) } else { 0 }).collect();
        // Lexicographic order visits every lower neighbour first.
        for m in lower_neighbours(n.as_slice()) {
            let idx = grid.index_of(&m).expect("neighbour inside box");
            for k in 0..dim {
                v[k] = v[k].max(values[idx][k]);
            }
        }
        values.push(v);
    }
    let rows: Vec<LoadVector> = values.into_iter().map(LoadVector::new).collect();
    Ok(Evaluator::from_table(SuccessTable::from_rows(cap.clone(), false, &rows)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_tables_are_increasing_and_contractive() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cap = LoadVector::from([3, 2, 4]);
        let grid = VerificationBox::new(cap.clone()).unwrap();
        for _ in 0..20 {
            let f = random_increasing_table(&mut rng, &cap).unwrap();
            assert!(is_increasing(&f, &grid).unwrap());
            assert!(verify_properties(&f, &grid).unwrap().is_contractive());
        }
    }

    #[test]
    fn laws_hold_on_small_tables() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cap = LoadVector::from([3, 3]);
        let grid = VerificationBox::new(cap.clone()).unwrap();
        for _ in 0..10 {
            let f = random_increasing_table(&mut rng, &cap).unwrap();
            let g = random_increasing_table(&mut rng, &cap).unwrap();
            let h = random_increasing_table(&mut rng, &cap).unwrap();
            assert_eq!(check_laws(&f, &g, &h, &grid).unwrap(), Vec::new());
        }
    }

    #[test]
    fn non_increasing_inputs_are_caught() {
        let grid = VerificationBox::new([4]).unwrap();
        let f = Evaluator::from_fn(1, "dip_at_two", |n| vec![if n[0] == 2 { 0 } else { n[0] }]);
        assert!(!is_increasing(&f, &grid).unwrap());
        let v = check_laws(&f, &f, &f, &grid).unwrap();
        assert!(v.iter().any(|v| v.law == Law::IncreasingClosed), "{v:?}");
    }
}
