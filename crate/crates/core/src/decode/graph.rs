//! Weighted detector matching graph from elementary fault locations.
//!
//! Every channel component is decomposed into X/Z atoms (a Y error is an X
//! atom plus a Z atom on the same qubit). Each atom's detector signature
//! lives entirely in one correction family: X-type errors light Z-kind
//! detectors and vice versa, ancilla readout flips light their own kind.
//! Within a component the atom signatures of one family XOR into a piece;
//! each non-empty piece becomes exactly one edge:
//! - 1 detector: edge to the virtual boundary;
//! - 2 detectors: edge between them;
//! - more, or none but an observable flip: hard error, the schedule is
//!   broken (such faults would be undecodable or silently logical).
//!
//! Parallel edges from different mechanisms merge by XOR of independent
//! events, p = p1(1-p2) + p2(1-p1); their observable masks must agree.
//! Weights ln((1-p)/p) are computed after all merging. A naive summed
//! mode exists to measure the sensitivity of decoded rates to the merge
//! convention.

use std::collections::HashMap;

use crate::circuit::{Circuit, FaultSite};
use crate::error::{Error, Result};
use crate::geom::{Pauli, StabKind};
use crate::sim::frame::{assemble, run_frames, Frame};

/// Virtual boundary endpoint in [`Edge`].
pub const BOUNDARY: u32 = u32::MAX;

/// One matching-graph edge; `u < v` and only `v` may be [`BOUNDARY`].
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    /// Total probability that an odd number of contributing faults fire.
    pub p: f64,
    /// ln((1-p)/p), finite and positive for p in (0, 1/2).
    pub weight: f64,
    /// Bit 0: traversing this edge flips the logical observable.
    pub observable_mask: u8,
}

/// Detector matching graph with a single virtual boundary node.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingGraph {
    pub n_detectors: u32,
    /// Correction family of each detector.
    pub kinds: Vec<StabKind>,
    /// Sorted by (u, v); at most one edge per endpoint pair.
    pub edges: Vec<Edge>,
}

/// (site, slot, base Pauli) after Y-decomposition; the propagation unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct AtomKey {
    site: u32,
    slot: u8,
    pauli: Pauli,
}

/// Signature and observable flip of one atom.
struct AtomEffect {
    detectors: Vec<u32>,
    observable: bool,
}

fn describe_fault(circuit: &Circuit, site: u32) -> String {
    let s: &FaultSite = &circuit.sites[site as usize];
    let class = &circuit.classes[s.class as usize];
    format!(
        "site {site} ({} {:?} on {:?} at step {})",
        class.ctx.label(),
        class.kind,
        &s.qubits[..class.kind.arity()],
        s.step
    )
}

/// Propagate each unique atom alone, 64 per frame pass.
fn atom_effects(circuit: &Circuit, atoms: &[AtomKey]) -> HashMap<AtomKey, AtomEffect> {
    let mut effects = HashMap::with_capacity(atoms.len());
    for chunk in atoms.chunks(64) {
        let mut lanes: HashMap<u32, Vec<(u8, AtomKey)>> = HashMap::new();
        for (lane, &atom) in chunk.iter().enumerate() {
            lanes.entry(atom.site).or_default().push((lane as u8, atom));
        }
        let apply = |s: u32, frame: &mut Frame| {
            let Some(picks) = lanes.get(&s) else { return };
            let site = &circuit.sites[s as usize];
            for &(lane, atom) in picks {
                frame.apply(site.qubits[atom.slot as usize], atom.pauli, 1u64 << lane);
            }
        };
        let batch = assemble(circuit, &run_frames(circuit, apply));
        for (lane, &atom) in chunk.iter().enumerate() {
            let detectors: Vec<u32> = batch
                .detectors
                .iter()
                .enumerate()
                .filter_map(|(d, &w)| (w >> lane & 1 == 1).then_some(d as u32))
                .collect();
            let observable = batch.observable >> lane & 1 == 1;
            effects.insert(atom, AtomEffect { detectors, observable });
        }
    }
    effects
}

/// How probabilities of parallel edges combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMode {
    /// XOR of independent events, p1(1-p2) + p2(1-p1).
    #[default]
    XorMerged,
    /// Naive sum p1 + p2; valid while the total stays below 1/2.
    Summed,
}

/// Build the matching graph; fails loudly on undecodable fault structure.
pub fn extract_graph(circuit: &Circuit) -> Result<MatchingGraph> {
    extract_graph_with(circuit, WeightMode::XorMerged)
}

/// Build the matching graph under an explicit parallel-edge convention.
pub fn extract_graph_with(circuit: &Circuit, mode: WeightMode) -> Result<MatchingGraph> {
    let kinds: Vec<StabKind> = circuit.detectors.iter().map(|d| d.kind).collect();

    // Unique atoms across all components.
    fn atom_of(pauli: Pauli, slot: usize, site: u32, out: &mut Vec<AtomKey>) {
        let slot = slot as u8;
        match pauli {
            Pauli::Y => {
                out.push(AtomKey { site, slot, pauli: Pauli::X });
                out.push(AtomKey { site, slot, pauli: Pauli::Z });
            }
            p => out.push(AtomKey { site, slot, pauli: p }),
        }
    }
    let mut unique: Vec<AtomKey> = vec![];
    let mut seen: HashMap<AtomKey, ()> = HashMap::new();
    let mut component_atoms: Vec<(u32, Vec<AtomKey>, f64)> = vec![];
    for (fault, _, comp, p_each) in circuit.components() {
        let mut atoms = vec![];
        for (slot, pauli) in comp.iter().enumerate() {
            if let Some(p) = pauli {
                atom_of(*p, slot, fault.site, &mut atoms);
            }
        }
        for &a in &atoms {
            if seen.insert(a, ()).is_none() {
                unique.push(a);
            }
        }
        component_atoms.push((fault.site, atoms, p_each));
    }
    let effects = atom_effects(circuit, &unique);

    // Atom family: the kind shared by all its detectors.
    let family_of = |site: u32, atom: &AtomKey| -> Result<Option<StabKind>> {
        let eff = &effects[atom];
        let Some(&first) = eff.detectors.first() else { return Ok(None) };
        let kind = kinds[first as usize];
        if eff.detectors.iter().any(|&d| kinds[d as usize] != kind) {
            return Err(Error::Validation(format!(
                "atom {:?} of {} fires both detector families",
                atom.pauli,
                describe_fault(circuit, site)
            )));
        }
        Ok(Some(kind))
    };

    // Accumulate pieces into edges keyed by endpoints.
    let mut merged: HashMap<(u32, u32), (f64, u8)> = HashMap::new();
    for (site, atoms, p_each) in component_atoms {
        for family in [StabKind::Z, StabKind::X] {
            let mut dets: Vec<u32> = vec![];
            let mut obs = false;
            let mut active = false;
            for atom in &atoms {
                let eff = &effects[atom];
                let fam = family_of(site, atom)?;
                // Detector-free atoms join the family their observable flip
                // belongs to; with no detectors and no flip they are inert.
                let belongs = match fam {
                    Some(f) => f == family,
                    None => eff.observable && family == StabKind::Z,
                };
                if !belongs {
                    continue;
                }
                active = true;
                let mut joined = Vec::with_capacity(dets.len() + eff.detectors.len());
                let (mut i, mut j) = (0, 0);
                while i < dets.len() && j < eff.detectors.len() {
                    match dets[i].cmp(&eff.detectors[j]) {
                        std::cmp::Ordering::Less => {
                            joined.push(dets[i]);
                            i += 1;
                        }
                        std::cmp::Ordering::Greater => {
                            joined.push(eff.detectors[j]);
                            j += 1;
                        }
                        std::cmp::Ordering::Equal => {
                            i += 1;
                            j += 1;
                        }
                    }
                }
                joined.extend_from_slice(&dets[i..]);
                joined.extend_from_slice(&eff.detectors[j..]);
                dets = joined;
                obs ^= eff.observable;
            }
            if !active {
                continue;
            }
            let key = match dets.len() {
                0 if obs => {
                    return Err(Error::Validation(format!(
                        "undetectable logical fault (boundary-boundary hazard): {}",
                        describe_fault(circuit, site)
                    )));
                }
                0 => continue,
                1 => (dets[0], BOUNDARY),
                2 => (dets[0], dets[1]),
                n => {
                    return Err(Error::Validation(format!(
                        "fault flips {n} detectors in one family: {}",
                        describe_fault(circuit, site)
                    )));
                }
            };
            let mask = obs as u8;
            match merged.entry(key) {
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert((p_each, mask));
                }
                std::collections::hash_map::Entry::Occupied(mut e) => {
                    let (p_old, mask_old) = *e.get();
                    if mask_old != mask {
                        return Err(Error::Validation(format!(
                            "edge ({}, {}) has conflicting observable masks; offender: {}",
                            key.0,
                            key.1,
                            describe_fault(circuit, site)
                        )));
                    }
                    let p_new = match mode {
                        WeightMode::XorMerged => {
                            p_old * (1.0 - p_each) + p_each * (1.0 - p_old)
                        }
                        WeightMode::Summed => p_old + p_each,
                    };
                    e.insert((p_new, mask_old));
                }
            }
        }
    }

    let mut edges: Vec<Edge> = merged
        .into_iter()
        .map(|((u, v), (p, observable_mask))| {
            if !(0.0..0.5).contains(&p) {
                return Err(Error::InvalidProbability { name: "edge", value: p });
            }
            Ok(Edge { u, v, p, weight: ((1.0 - p) / p).ln(), observable_mask })
        })
        .collect::<Result<_>>()?;
    edges.sort_by_key(|e| (e.u, e.v));
    Ok(MatchingGraph { n_detectors: circuit.detectors.len() as u32, kinds, edges })
}

impl MatchingGraph {
    /// Census plus every edge, stable across runs; for golden comparisons.
    pub fn dump_text(&self) -> String {
        let mut out = String::new();
        let fam = |d: u32| self.kinds[d as usize];
        let boundary = self.edges.iter().filter(|e| e.v == BOUNDARY).count();
        let masked = self.edges.iter().filter(|e| e.observable_mask != 0).count();
        let count = |k: StabKind| self.edges.iter().filter(|e| fam(e.u) == k).count();
        out.push_str(&format!(
            "GRAPH detectors={} edges={} boundary_edges={} masked_edges={} \
             z_family={} x_family={}\n",
            self.n_detectors,
            self.edges.len(),
            boundary,
            masked,
            count(StabKind::Z),
            count(StabKind::X),
        ));
        for e in &self.edges {
            let v = if e.v == BOUNDARY { "B".to_string() } else { e.v.to_string() };
            out.push_str(&format!(
                "EDGE {} {} p={:.12e} w={:.12e} mask={}\n",
                e.u, v, e.p, e.weight, e.observable_mask
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{
        build_memory_circuit, distance::component_signatures, Basis, ChannelKind, CzErrorSource,
        Detector, FaultCtx, NoiseParams, Op, ProbClass, ShuttleChannel,
    };
    use crate::geom::build_layout;

    fn unbiased(cer: f64, ber: f64) -> NoiseParams {
        NoiseParams { cer, ber, shuttle: ShuttleChannel::Unbiased, cz_source: CzErrorSource::Cer }
    }

    #[test]
    fn test_noiseless_graph_has_no_edges() {
        let layout = build_layout(3).unwrap();
        let circuit =
            build_memory_circuit(&layout, 3, Basis::Z, &NoiseParams::noiseless()).unwrap();
        let graph = extract_graph(&circuit).unwrap();
        assert_eq!(graph.n_detectors, 24);
        assert!(graph.edges.is_empty());
    }

    #[test]
    fn test_every_edge_endpoint_pair_shares_a_family() {
        let layout = build_layout(3).unwrap();
        let circuit = build_memory_circuit(&layout, 3, Basis::Z, &unbiased(0.001, 0.01)).unwrap();
        let graph = extract_graph(&circuit).unwrap();
        assert!(!graph.edges.is_empty());
        for e in &graph.edges {
            assert!(e.weight > 0.0 && e.weight.is_finite());
            assert!(e.u < graph.n_detectors);
            if e.v != BOUNDARY {
                assert!(e.u < e.v, "unsorted edge {e:?}");
                assert_eq!(graph.kinds[e.u as usize], graph.kinds[e.v as usize]);
            }
        }
        // At most one edge per endpoint pair after merging.
        let mut keys: Vec<(u32, u32)> = graph.edges.iter().map(|e| (e.u, e.v)).collect();
        keys.dedup();
        assert_eq!(keys.len(), graph.edges.len());
    }

    #[test]
    fn test_data_y_fault_splits_into_both_families() {
        // A Y error while the central data qubit idles fires two Z-kind and
        // two X-kind detectors; the graph must carry one edge per family.
        let layout = build_layout(3).unwrap();
        let circuit = build_memory_circuit(&layout, 3, Basis::Z, &unbiased(0.001, 0.0)).unwrap();
        let table = component_signatures(&circuit);
        let graph = extract_graph(&circuit).unwrap();
        let idx = table
            .refs
            .iter()
            .position(|r| {
                let site = &circuit.sites[r.site as usize];
                let class = &circuit.classes[site.class as usize];
                class.ctx == FaultCtx::Idle
                    && site.qubits[0] == 4
                    && site.step == 10
                    && class.kind.components()[r.component as usize][0] == Some(crate::geom::Pauli::Y)
            })
            .unwrap();
        let sig = &table.signatures[idx];
        assert_eq!(sig.len(), 4);
        let (z, x): (Vec<u32>, Vec<u32>) = sig
            .iter()
            .partition(|&&d| graph.kinds[d as usize] == StabKind::Z);
        assert_eq!(z.len(), 2);
        assert_eq!(x.len(), 2);
        assert!(graph.edges.iter().any(|e| (e.u, e.v) == (z[0], z[1])));
        assert!(graph.edges.iter().any(|e| (e.u, e.v) == (x[0], x[1])));
    }

    #[test]
    fn test_pure_biased_noise_yields_time_like_measurement_edges() {
        // With cer = 0 and biased shuttling every fault acts as a readout
        // flip: all edges stay within one stabilizer's detector column and
        // connect adjacent rounds (or the temporal boundary), never flipping
        // the observable.
        let layout = build_layout(3).unwrap();
        let rounds = 4;
        let noise = NoiseParams {
            cer: 0.0,
            ber: 0.02,
            shuttle: ShuttleChannel::Biased,
            cz_source: CzErrorSource::Cer,
        };
        let circuit = build_memory_circuit(&layout, rounds, Basis::Z, &noise).unwrap();
        let graph = extract_graph(&circuit).unwrap();
        assert!(!graph.edges.is_empty());
        for e in &graph.edges {
            assert_eq!(e.observable_mask, 0);
            let du = &circuit.detectors[e.u as usize];
            if e.v == BOUNDARY {
                // Temporal end of a column the anchor layer does not cover.
                assert!(du.round == rounds || du.round == 2, "boundary edge at {du:?}");
                assert_eq!(du.kind, StabKind::X);
            } else {
                let dv = &circuit.detectors[e.v as usize];
                assert_eq!((du.kind, du.stab), (dv.kind, dv.stab));
                assert_eq!(dv.round.abs_diff(du.round), 1);
            }
        }
    }

    #[test]
    fn test_graph_census_is_stable_for_fixed_shape() {
        // Same circuit shape, different rates: identical edge structure.
        let layout = build_layout(3).unwrap();
        let a = extract_graph(
            &build_memory_circuit(&layout, 3, Basis::Z, &unbiased(0.001, 0.01)).unwrap(),
        )
        .unwrap();
        let b = extract_graph(
            &build_memory_circuit(&layout, 3, Basis::Z, &unbiased(0.004, 0.02)).unwrap(),
        )
        .unwrap();
        let keys = |g: &MatchingGraph| -> Vec<(u32, u32, u8)> {
            g.edges.iter().map(|e| (e.u, e.v, e.observable_mask)).collect()
        };
        assert_eq!(keys(&a), keys(&b));
    }

    #[test]
    fn test_summed_mode_dominates_xor_merged_probabilities() {
        let layout = build_layout(3).unwrap();
        let circuit = build_memory_circuit(&layout, 3, Basis::Z, &unbiased(0.003, 0.0)).unwrap();
        let merged = extract_graph_with(&circuit, WeightMode::XorMerged).unwrap();
        let summed = extract_graph_with(&circuit, WeightMode::Summed).unwrap();
        assert_eq!(merged.edges.len(), summed.edges.len());
        let mut any_parallel = false;
        for (m, s) in merged.edges.iter().zip(&summed.edges) {
            assert_eq!((m.u, m.v, m.observable_mask), (s.u, s.v, s.observable_mask));
            // p1 + p2 exceeds p1(1-p2) + p2(1-p1) exactly when edges merged.
            assert!(s.p >= m.p);
            assert!(s.weight <= m.weight);
            any_parallel |= s.p > m.p;
        }
        assert!(any_parallel, "expected at least one merged parallel edge");
    }

    /// Minimal hand-built circuit: measure q0..q2 once, detectors as given.
    fn tiny_circuit(detectors: Vec<Detector>, observable: Vec<u32>) -> Circuit {
        let noise = unbiased(0.01, 0.0);
        Circuit {
            distance: 3,
            rounds: 1,
            basis: Basis::Z,
            noise,
            n_qubits: 3,
            ops: vec![
                Op::Fault(0),
                Op::Fault(1),
                Op::Measure(0),
                Op::Measure(1),
                Op::Measure(2),
                Op::Tick,
            ],
            sites: vec![
                FaultSite { class: 0, qubits: [0, 1], step: 0 },
                FaultSite { class: 0, qubits: [0, 2], step: 0 },
            ],
            classes: vec![ProbClass {
                ctx: FaultCtx::Cz,
                kind: ChannelKind::Depolarize2,
                p: 0.01,
                sites: vec![0, 1],
            }],
            detectors,
            observable,
            n_records: 3,
            n_steps: 1,
        }
    }

    #[test]
    fn test_conflicting_masks_abort_extraction() {
        // Both sites produce the edge (d0, d1); only the second one flips
        // the observable because record 2 doubles as detector 1 and logical.
        let circuit = tiny_circuit(
            vec![
                Detector { kind: StabKind::Z, stab: 0, round: 1, records: vec![0] },
                Detector { kind: StabKind::Z, stab: 1, round: 1, records: vec![1, 2] },
            ],
            vec![2],
        );
        let err = extract_graph(&circuit).unwrap_err().to_string();
        assert!(err.contains("conflicting observable masks"), "{err}");
    }

    #[test]
    fn test_three_detector_fault_is_a_hard_error() {
        let circuit = tiny_circuit(
            vec![
                Detector { kind: StabKind::Z, stab: 0, round: 1, records: vec![0] },
                Detector { kind: StabKind::Z, stab: 1, round: 1, records: vec![0, 1] },
                Detector { kind: StabKind::Z, stab: 2, round: 1, records: vec![0, 2] },
            ],
            vec![],
        );
        let err = extract_graph(&circuit).unwrap_err().to_string();
        assert!(err.contains("3 detectors"), "{err}");
    }

    #[test]
    fn test_undetectable_logical_fault_is_a_hard_error() {
        let circuit = tiny_circuit(vec![], vec![0]);
        let err = extract_graph(&circuit).unwrap_err().to_string();
        assert!(err.contains("boundary-boundary hazard"), "{err}");
    }
}
