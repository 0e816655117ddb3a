//! Canonical receivers and the composition theorems for building larger
//! receivers out of smaller ones.
//!
//! Canonical constructors and theorem-backed combinators return evaluators
//! whose flags are known by construction. Everything else must go through
//! [`crate::properties::certify`] before it is accepted by [`multiplex`] or
//! [`packet_code`].

use crate::error::{Error, Result};
use crate::evaluator::{Evaluator, Flags, Node};
use crate::topology::BipartiteTopology;

/// Slotted ALOHA: a lone packet is received, collisions lose everything.
pub fn slotted_aloha() -> Evaluator {
    Evaluator::slotted_aloha()
}

/// `D`-fold ALOHA: up to `D` packets in a slot are all decoded.
pub fn d_fold(d: u32) -> Result<Evaluator> {
    if d == 0 {
        return Err(Error::InvalidParameter("D-fold ALOHA needs D >= 1".into()));
    }
    Ok(Evaluator::d_fold(d))
}

/// Near-far SIC decoding of one strong and one weak class: both decode iff
/// at most one packet of each is present.
pub fn near_far() -> Evaluator {
    Evaluator::near_far()
}

/// Receiver `phi` followed by receiver `psi`, with SIC in one direction only.
///
/// Returns `(psi^c o phi^c)^c`, i.e. `phi(n) + psi(n - phi(n))`.
pub fn tandem(phi: &Evaluator, psi: &Evaluator) -> Result<Evaluator> {
    Ok(psi.complement().compose(&phi.complement())?.complement())
}

/// Two receivers exchanging decoded packets until nothing more decodes.
///
/// Returns `((psi^c o phi^c)^*)^c`. When both inputs have monotone failure
/// functions the result is independent of the decoding order and is itself
/// monotone, which the returned flags record.
pub fn cooperative(phi: &Evaluator, psi: &Evaluator) -> Result<Evaluator> {
    let eta = psi.complement().compose(&phi.complement())?.closure().complement();
    let monotone = phi.flags().monotone_failure && psi.flags().monotone_failure;
    Ok(eta.with_flags(Flags { monotone_failure: monotone, all_or_nothing: false }))
}

/// Left fold of [`cooperative`] over any number of receivers.
pub fn cooperative_all(receivers: &[Evaluator]) -> Result<Evaluator> {
    let (first, rest) =
        receivers.split_first().ok_or_else(|| Error::InvalidParameter("need at least one receiver".into()))?;
    rest.iter().try_fold(first.clone(), |acc, r| cooperative(&acc, r))
}

/// `K` external classes multiplexed onto the `T` classes of an
/// all-or-nothing receiver; the result is all-or-nothing.
pub fn multiplex(phi: &Evaluator, h: &BipartiteTopology) -> Result<Evaluator> {
    if !h.is_multiplexing_valid() {
        return Err(Error::InvalidTopology("multiplexing needs at most one edge per row".into()));
    }
    require_all_or_nothing(phi, h)?;
    Ok(Evaluator::from_node(Node::Multiplex { inner: phi.clone(), topology: h.clone() }, Flags::ALL))
}

/// `K` external classes each multicast to the disjoint receiver sets `B_k`
/// of an all-or-nothing receiver, decoded with SIC across copies.
///
/// Builds `theta_k(n) = max_{t in B_k} phi_t(nH)` and returns
/// `((theta^c)^*)^c`. Receivers without the all-or-nothing flag are
/// rejected: for them copies of a packet are not interchangeable and the
/// count-level recursion is wrong.
pub fn packet_code(phi: &Evaluator, h: &BipartiteTopology) -> Result<Evaluator> {
    if !h.is_coding_valid() {
        return Err(Error::InvalidTopology("packet coding needs at most one edge per column".into()));
    }
    require_all_or_nothing(phi, h)?;
    let theta = Evaluator::from_node(Node::BestCopy { inner: phi.clone(), topology: h.clone() }, Flags::NONE);
    Ok(theta.complement().closure().complement().with_flags(Flags::ALL))
}

fn require_all_or_nothing(phi: &Evaluator, h: &BipartiteTopology) -> Result<()> {
    if phi.dim() != h.receivers() {
        return Err(Error::DimensionMismatch { expected: h.receivers(), actual: phi.dim() });
    }
    if !phi.flags().all_or_nothing {
        return Err(Error::MissingFlag("all-or-nothing"));
    }
    Ok(())
}

/// `T` cooperative `D`-fold receivers wired to `K` classes by an arbitrary
/// binary `H`, built as packet coding over multiplexing through the
/// one-node-per-edge factorisation of `H`.
pub fn d_fold_network(h: &BipartiteTopology, d: u32) -> Result<Evaluator> {
    d_fold(d)?;
    if h.edge_count() == 0 {
        // No class is heard by any receiver.
        return Ok(Evaluator::zero(h.classes()).with_flags(Flags::ALL));
    }
    let (coding, muxing) = crate::topology::split_bipartite(h)?;
    let slots = (1..h.receivers()).try_fold(d_fold(d)?, |acc, _| d_fold(d).map(|r| acc.parallel(&r)))?;
    let per_edge = multiplex(&slots, &muxing)?;
    packet_code(&per_edge, &coding)
}
