use crate::error::{Error, Result};
use crate::evaluator::Evaluator;
use crate::load::LoadVector;
use crate::topology::BipartiteTopology;

pub const ORACLE_PACKET_LIMIT: u64 = 12;

/// Decodes a network of single-class receivers by tracking every packet.
///
/// Receiver `t` hears the residual packets of the classes in its column of
/// `h` and must decode either all of them or none. Rounds are synchronous and
/// repeat until nothing new decodes. Returns decoded counts per class.
pub fn exhaustive_sic_oracle(receivers: &[Evaluator], h: &BipartiteTopology, n: &LoadVector) -> Result<LoadVector> {
    if receivers.len() != h.receivers() {
        return Err(Error::DimensionMismatch { expected: h.receivers(), actual: receivers.len() });
    }
    if n.dim() != h.classes() {
        return Err(Error::DimensionMismatch { expected: h.classes(), actual: n.dim() });
    }
    if let Some(r) = receivers.iter().find(|r| r.dim() != 1) {
        return Err(Error::DimensionMismatch { expected: 1, actual: r.dim() });
    }
    let total = n.total();
    if total > ORACLE_PACKET_LIMIT {
        return Err(Error::InstanceTooLarge { packets: total, limit: ORACLE_PACKET_LIMIT });
    }
    let packet_class: Vec<usize> =
        n.as_slice().iter().enumerate().flat_map(|(k, &c)| std::iter::repeat_n(k, c as usize)).collect();
    let mut decoded = vec![false; packet_class.len()];
    loop {
        let mut newly = Vec::new();
        for (t, phi) in receivers.iter().enumerate() {
            let heard: Vec<usize> =
                (0..packet_class.len()).filter(|&p| !decoded[p] && h.get(packet_class[p], t)).collect();
            let count = heard.len() as u32;
            let s = phi.eval_slice(&[count])?[0];
            if s == count {
                newly.extend(heard);
            } else if s != 0 {
                return Err(Error::InvalidParameter(format!(
                    "receiver {t} decodes {s} of {count} packets; only all-or-nothing receivers are supported"
                )));
            }
        }
        let mut progress = false;
        for p in newly {
            if !decoded[p] {
                decoded[p] = true;
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }
    let mut out = vec![0u32; n.dim()];
    for (p, &k) in packet_class.iter().enumerate() {
        if decoded[p] {
            out[k] += 1;
        }
    }
    Ok(LoadVector::new(out))
}
