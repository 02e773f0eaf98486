//! Exhaustive search for minimum-weight undetected logical faults.
//!
//! A fault set is an undetected logical when its combined detector signature
//! is empty but the observable flips. The search runs in ascending weight:
//! - weight 1: scan all elementary components;
//! - weight 2: group signatures, look for same-signature pairs of opposite
//!   observable parity (linear in the component count);
//! - weight 3: for every pair, hash-join the XOR of their signatures against
//!   the single-component table (quadratic, guarded by a budget).
//!
//! Signatures come from batched frame propagation, 64 components per pass.

use std::collections::HashMap;

use crate::circuit::{Circuit, FaultRef};
use crate::error::{Error, Result};
use crate::sim::frame::{assemble, run_frames, Frame};

/// Outcome of a bounded distance search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistanceBound {
    /// Minimal undetected logical found, with one witness fault set.
    Found { weight: u32, faults: Vec<FaultRef> },
    /// No undetected logical at or below the searched weight.
    AtLeast(u32),
}

/// Detector signature and observable parity of every elementary component.
pub(crate) struct SignatureTable {
    pub refs: Vec<FaultRef>,
    /// Fired detector ids, ascending, per component.
    pub signatures: Vec<Vec<u32>>,
    pub observables: Vec<bool>,
}

/// Propagate every elementary component, 64 per frame pass.
pub(crate) fn component_signatures(circuit: &Circuit) -> SignatureTable {
    let refs: Vec<FaultRef> = circuit.components().map(|(r, ..)| r).collect();
    let mut signatures = Vec::with_capacity(refs.len());
    let mut observables = Vec::with_capacity(refs.len());
    for chunk in refs.chunks(64) {
        let mut lanes: HashMap<u32, Vec<(u8, u8)>> = HashMap::new();
        for (lane, fault) in chunk.iter().enumerate() {
            lanes.entry(fault.site).or_default().push((lane as u8, fault.component));
        }
        let apply = |s: u32, frame: &mut Frame| {
            let Some(picks) = lanes.get(&s) else { return };
            let site = &circuit.sites[s as usize];
            let table = circuit.classes[site.class as usize].kind.components();
            for &(lane, comp) in picks {
                for (slot, pauli) in table[comp as usize].iter().enumerate() {
                    if let Some(p) = pauli {
                        frame.apply(site.qubits[slot], *p, 1u64 << lane);
                    }
                }
            }
        };
        let batch = assemble(circuit, &run_frames(circuit, apply));
        for lane in 0..chunk.len() {
            let sig: Vec<u32> = batch
                .detectors
                .iter()
                .enumerate()
                .filter_map(|(d, &w)| (w >> lane & 1 == 1).then_some(d as u32))
                .collect();
            signatures.push(sig);
            observables.push(batch.observable >> lane & 1 == 1);
        }
    }
    SignatureTable { refs, signatures, observables }
}

/// Sorted symmetric difference of two ascending id lists.
fn xor_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Pair evaluations allowed for the weight-3 stage before refusing.
const PAIR_BUDGET: u64 = 20_000_000;

/// Smallest number of elementary faults that flips the observable while
/// firing no detector, searched exhaustively up to `max_weight` (1 to 3).
pub fn circuit_distance(circuit: &Circuit, max_weight: u32) -> Result<DistanceBound> {
    if max_weight == 0 {
        return Err(Error::InvalidParameter("max_weight must be at least 1".into()));
    }
    let table = component_signatures(circuit);
    let n = table.refs.len();
    if max_weight > 3 {
        let quads = (n as u64).pow(4) / 24;
        return Err(Error::Budget(format!(
            "exhaustive search above weight 3 is out of budget: \
             ~{quads} weight-4 combinations over {n} components"
        )));
    }

    for i in 0..n {
        if table.signatures[i].is_empty() && table.observables[i] {
            return Ok(DistanceBound::Found { weight: 1, faults: vec![table.refs[i]] });
        }
    }
    if max_weight == 1 {
        return Ok(DistanceBound::AtLeast(2));
    }

    // Key: (signature, observable parity) -> first component index seen.
    let mut by_sig: HashMap<(&[u32], bool), usize> = HashMap::new();
    for i in 0..n {
        let sig = table.signatures[i].as_slice();
        if let Some(&j) = by_sig.get(&(sig, !table.observables[i])) {
            return Ok(DistanceBound::Found {
                weight: 2,
                faults: vec![table.refs[j], table.refs[i]],
            });
        }
        by_sig.entry((sig, table.observables[i])).or_insert(i);
    }
    if max_weight == 2 {
        return Ok(DistanceBound::AtLeast(3));
    }

    let pairs = n as u64 * (n as u64 - 1) / 2;
    if pairs > PAIR_BUDGET {
        return Err(Error::Budget(format!(
            "weight-3 search needs ~{pairs} pair evaluations over {n} components, \
             budget is {PAIR_BUDGET}"
        )));
    }
    for i in 0..n {
        for j in i + 1..n {
            let joint = xor_sorted(&table.signatures[i], &table.signatures[j]);
            let parity = table.observables[i] ^ table.observables[j];
            if let Some(&k) = by_sig.get(&(joint.as_slice(), !parity)) {
                if k != i && k != j {
                    return Ok(DistanceBound::Found {
                        weight: 3,
                        faults: vec![table.refs[i], table.refs[j], table.refs[k]],
                    });
                }
            }
        }
    }
    Ok(DistanceBound::AtLeast(4))
}
