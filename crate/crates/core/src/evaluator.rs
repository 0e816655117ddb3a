//! Success functions as immutable, lazily evaluated composites.
//!
//! An [`Evaluator`] maps a [`LoadVector`] `n` to `phi(n) <= n`. The four
//! operations of the algebra (minimum, composition, closure, complement) and
//! the parallel product build new evaluators without tabulating anything;
//! every query only touches loads below the queried one.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::load::LoadVector;
use crate::table::SuccessTable;
use crate::topology::BipartiteTopology;

/// Properties of a success function established by verification or by a
/// composition theorem.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Flags {
    /// The failure function `n - phi(n)` is increasing.
    pub monotone_failure: bool,
    /// Every class is decoded entirely or not at all, with the on-off property.
    pub all_or_nothing: bool,
}

impl Flags {
    pub const NONE: Flags = Flags { monotone_failure: false, all_or_nothing: false };
    pub const ALL: Flags = Flags { monotone_failure: true, all_or_nothing: true };

    fn and(self, other: Flags) -> Flags {
        Flags {
            monotone_failure: self.monotone_failure && other.monotone_failure,
            all_or_nothing: self.all_or_nothing && other.all_or_nothing,
        }
    }
}

type RuleFn = dyn Fn(&[u32]) -> Vec<u32> + Send + Sync;

pub(crate) enum Node {
    Identity(usize),
    Zero(usize),
    SlottedAloha,
    DFold(u32),
    NearFar,
    Table(SuccessTable),
    Custom {
        dim: usize,
        name: String,
        rule: Arc<RuleFn>,
    },
    Complement(Evaluator),
    Minimum(Evaluator, Evaluator),
    /// `outer(inner(n))`.
    Compose {
        outer: Evaluator,
        inner: Evaluator,
    },
    Closure {
        inner: Evaluator,
        memo: Mutex<HashMap<Vec<u32>, Vec<u32>>>,
    },
    Parallel(Evaluator, Evaluator),
    /// `psi_k(n) = n_k` iff the receiver class `k` is routed to decodes `nH`.
    Multiplex {
        inner: Evaluator,
        topology: BipartiteTopology,
    },
    /// `theta_k(n) = max_{t in B_k} phi_t(nH)`.
    BestCopy {
        inner: Evaluator,
        topology: BipartiteTopology,
    },
}

/// A success function `phi`, shared cheaply by reference counting.
#[derive(Clone)]
pub struct Evaluator {
    node: Arc<Node>,
    flags: Flags,
}

impl Evaluator {
    pub(crate) fn from_node(node: Node, flags: Flags) -> Self {
        Evaluator { node: Arc::new(node), flags }
    }

    /// The identity `epsilon(n) = n`.
    pub fn identity(dim: usize) -> Self {
        Self::from_node(Node::Identity(dim), Flags { monotone_failure: true, all_or_nothing: true })
    }

    /// The receiver that decodes nothing.
    pub fn zero(dim: usize) -> Self {
        Self::from_node(Node::Zero(dim), Flags { monotone_failure: true, all_or_nothing: true })
    }

    pub(crate) fn slotted_aloha() -> Self {
        Self::from_node(Node::SlottedAloha, Flags::ALL)
    }

    pub(crate) fn d_fold(d: u32) -> Self {
        Self::from_node(Node::DFold(d), Flags::ALL)
    }

    pub(crate) fn near_far() -> Self {
        Self::from_node(Node::NearFar, Flags::ALL)
    }

    /// Table-backed evaluator. Flags start cleared.
    pub fn from_table(table: SuccessTable) -> Self {
        Self::from_node(Node::Table(table), Flags::NONE)
    }

    /// Closed-form rule supplied by the caller. Contractivity is checked on
    /// every evaluation.
    pub fn from_fn<F>(dim: usize, name: impl Into<String>, rule: F) -> Self
    where
        F: Fn(&[u32]) -> Vec<u32> + Send + Sync + 'static,
    {
        Self::from_node(Node::Custom { dim, name: name.into(), rule: Arc::new(rule) }, Flags::NONE)
    }

    pub fn dim(&self) -> usize {
        match &*self.node {
            Node::Identity(d) | Node::Zero(d) => *d,
            Node::SlottedAloha | Node::DFold(_) => 1,
            Node::NearFar => 2,
            Node::Table(t) => t.dim(),
            Node::Custom { dim, .. } => *dim,
            Node::Complement(f) | Node::Closure { inner: f, .. } => f.dim(),
            Node::Minimum(f, _) => f.dim(),
            Node::Compose { inner, .. } => inner.dim(),
            Node::Parallel(f, g) => f.dim() + g.dim(),
            Node::Multiplex { topology, .. } | Node::BestCopy { topology, .. } => topology.classes(),
        }
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    /// Same function with the given flags. Callers are responsible for the
    /// flags being true; [`crate::properties::verify_properties`] is the
    /// checked route.
    pub fn with_flags(&self, flags: Flags) -> Self {
        Evaluator { node: Arc::clone(&self.node), flags }
    }

    /// The backing table, if this evaluator is table-backed.
    pub fn table(&self) -> Option<&SuccessTable> {
        match &*self.node {
            Node::Table(t) => Some(t),
            _ => None,
        }
    }

    /// `phi(n)`.
    pub fn evaluate(&self, n: &LoadVector) -> Result<LoadVector> {
        self.check_dim(n.dim())?;
        self.eval(n.as_slice()).map(LoadVector::new)
    }

    /// Convenience wrapper over [`Evaluator::evaluate`] for slices.
    pub fn eval_slice(&self, n: &[u32]) -> Result<Vec<u32>> {
        self.check_dim(n.len())?;
        self.eval(n)
    }

    fn check_dim(&self, actual: usize) -> Result<()> {
        let expected = self.dim();
        if expected != actual {
            return Err(Error::DimensionMismatch { expected, actual });
        }
        Ok(())
    }

    pub(crate) fn eval(&self, n: &[u32]) -> Result<Vec<u32>> {
        match &*self.node {
            Node::Identity(_) => Ok(n.to_vec()),
            Node::Zero(d) => Ok(vec![0; *d]),
            Node::SlottedAloha => Ok(vec![u32::from(n[0] == 1)]),
            Node::DFold(d) => Ok(vec![if n[0] <= *d { n[0] } else { 0 }]),
            Node::NearFar => Ok(if n[0] <= 1 && n[1] <= 1 { n.to_vec() } else { vec![0, 0] }),
            Node::Table(t) => t.lookup(n),
            Node::Custom { dim, rule, .. } => {
                let out = rule(n);
                if out.len() != *dim {
                    return Err(Error::DimensionMismatch { expected: *dim, actual: out.len() });
                }
                if out.iter().zip(n).any(|(o, x)| o > x) {
                    return Err(Error::NotContractive { load: n.to_vec(), output: out });
                }
                Ok(out)
            }
            Node::Complement(f) => {
                let phi = f.eval(n)?;
                Ok(n.iter().zip(phi).map(|(x, p)| x - p).collect())
            }
            Node::Minimum(f, g) => {
                let a = f.eval(n)?;
                let b = g.eval(n)?;
                Ok(a.into_iter().zip(b).map(|(x, y)| x.min(y)).collect())
            }
            Node::Compose { outer, inner } => {
                let m = inner.eval(n)?;
                outer.eval(&m)
            }
            Node::Closure { inner, memo } => {
                if let Some(hit) = memo.lock().unwrap().get(n) {
                    return Ok(hit.clone());
                }
                let (fixed, _) = iterate_to_fixed_point(inner, n)?;
                memo.lock().unwrap().insert(n.to_vec(), fixed.clone());
                Ok(fixed)
            }
            Node::Parallel(f, g) => {
                let split = f.dim();
                let mut out = f.eval(&n[..split])?;
                out.extend(g.eval(&n[split..])?);
                Ok(out)
            }
            Node::Multiplex { inner, topology } => {
                let decoded = inner.eval(&topology.forward(n))?;
                Ok((0..topology.classes())
                    .map(|k| {
                        let hit = topology.receivers_of(k).iter().any(|&t| decoded[t] > 0);
                        if hit {
                            n[k]
                        } else {
                            0
                        }
                    })
                    .collect())
            }
            Node::BestCopy { inner, topology } => {
                let decoded = inner.eval(&topology.forward(n))?;
                Ok((0..topology.classes())
                    .map(|k| topology.receivers_of(k).iter().map(|&t| decoded[t]).max().unwrap_or(0))
                    .collect())
            }
        }
    }

    /// Failure function `phi^c(n) = n - phi(n)`.
    pub fn complement(&self) -> Evaluator {
        Self::from_node(Node::Complement(self.clone()), Flags::NONE)
    }

    /// Componentwise `min[f(n), g(n)]`.
    pub fn minimum(&self, other: &Evaluator) -> Result<Evaluator> {
        self.check_dim(other.dim())?;
        Ok(Self::from_node(Node::Minimum(self.clone(), other.clone()), Flags::NONE))
    }

    /// `(self o other)(n) = self(other(n))`.
    pub fn compose(&self, other: &Evaluator) -> Result<Evaluator> {
        self.check_dim(other.dim())?;
        Ok(Self::from_node(Node::Compose { outer: self.clone(), inner: other.clone() }, Flags::NONE))
    }

    /// `f*`: the fixed point reached by iterating `f` from `n`. Results are
    /// memoized per returned evaluator.
    pub fn closure(&self) -> Evaluator {
        Self::from_node(Node::Closure { inner: self.clone(), memo: Mutex::new(HashMap::new()) }, Flags::NONE)
    }

    /// `(f, g)` acting on the concatenated classes of both.
    pub fn parallel(&self, other: &Evaluator) -> Evaluator {
        Self::from_node(Node::Parallel(self.clone(), other.clone()), self.flags.and(other.flags))
    }

    /// Iterates `f` from `n` until `f(m) = m`; returns the fixed point and
    /// the number of applications of `f` (at most `1 + sum n_k`).
    pub fn closure_trace(&self, n: &LoadVector) -> Result<(LoadVector, usize)> {
        self.check_dim(n.dim())?;
        let (fixed, steps) = iterate_to_fixed_point(self, n.as_slice())?;
        Ok((LoadVector::new(fixed), steps))
    }

    fn describe(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.node {
            Node::Identity(d) => write!(f, "id[{d}]"),
            Node::Zero(d) => write!(f, "zero[{d}]"),
            Node::SlottedAloha => write!(f, "sa"),
            Node::DFold(d) => write!(f, "dfold({d})"),
            Node::NearFar => write!(f, "nearfar"),
            Node::Table(t) => write!(f, "table{:?}", t.cap()),
            Node::Custom { name, .. } => write!(f, "{name}"),
            Node::Complement(g) => {
                g.describe(f)?;
                write!(f, "^c")
            }
            Node::Closure { inner, .. } => {
                write!(f, "(")?;
                inner.describe(f)?;
                write!(f, ")*")
            }
            Node::Minimum(a, b) => {
                write!(f, "(")?;
                a.describe(f)?;
                write!(f, " ^ ")?;
                b.describe(f)?;
                write!(f, ")")
            }
            Node::Compose { outer, inner } => {
                write!(f, "(")?;
                outer.describe(f)?;
                write!(f, " o ")?;
                inner.describe(f)?;
                write!(f, ")")
            }
            Node::Parallel(a, b) => {
                write!(f, "(")?;
                a.describe(f)?;
                write!(f, ", ")?;
                b.describe(f)?;
                write!(f, ")")
            }
            Node::Multiplex { inner, .. } => {
                write!(f, "mux(")?;
                inner.describe(f)?;
                write!(f, ")")
            }
            Node::BestCopy { inner, .. } => {
                write!(f, "theta(")?;
                inner.describe(f)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Debug for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.describe(f)?;
        write!(f, " {:?}", self.flags)
    }
}

fn iterate_to_fixed_point(f: &Evaluator, n: &[u32]) -> Result<(Vec<u32>, usize)> {
    let mut current = n.to_vec();
    let mut steps = 0usize;
    loop {
        let next = f.eval(&current)?;
        steps += 1;
        if next == current {
            return Ok((current, steps));
        }
        // A contractive map that moves strictly lowers the total, so this
        // loop runs at most 1 + sum(n) times.
        debug_assert!(next.iter().zip(&current).all(|(a, b)| a <= b));
        current = next;
    }
}
