//! Bit-packed Pauli-frame propagation: 64 shots per pass.
//!
//! A frame holds per-qubit X/Z flip flags, one bit lane per shot. Conjugation
//! rules: H swaps the flags; CZ adds each side's X flag to the partner's Z
//! flag; reset clears both; a Z-basis measurement outcome is flipped exactly
//! by the X flag. Faults are drawn in two passes: first each probability
//! class fires (site, lane) pairs by geometric skipping over its flattened
//! Bernoulli trials, then the op walk expands fired sites into uniformly
//! chosen channel components. Everything is a pure function of
//! (circuit, seed, batch index), so batches can run in any order on any
//! number of workers.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::circuit::{Circuit, FaultRef, Op};
use crate::error::{Error, Result};
use crate::geom::{Pauli, QubitId};

/// Packed outcome of up to 64 shots: one bit lane per shot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotBatch {
    /// One word per detector; bit l = detector fired in shot l.
    pub detectors: Vec<u64>,
    /// Bit l = logical readout flipped in shot l.
    pub observable: u64,
}

/// Deterministic single-shot outcome of forced faults.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InjectOutcome {
    /// Fired detector ids, ascending.
    pub detectors: Vec<u32>,
    pub observable: bool,
}

pub(crate) struct Frame {
    pub x: Vec<u64>,
    pub z: Vec<u64>,
}

impl Frame {
    pub fn new(n_qubits: u32) -> Self {
        Frame { x: vec![0; n_qubits as usize], z: vec![0; n_qubits as usize] }
    }

    #[inline]
    pub fn apply(&mut self, q: QubitId, pauli: Pauli, lanes: u64) {
        let q = q as usize;
        match pauli {
            Pauli::X => self.x[q] ^= lanes,
            Pauli::Z => self.z[q] ^= lanes,
            Pauli::Y => {
                self.x[q] ^= lanes;
                self.z[q] ^= lanes;
            }
        }
    }
}

/// Walk the op stream, calling `on_fault` at every fault site; returns the
/// measurement record words in order.
pub(crate) fn run_frames<F: FnMut(u32, &mut Frame)>(
    circuit: &Circuit,
    mut on_fault: F,
) -> Vec<u64> {
    let mut frame = Frame::new(circuit.n_qubits);
    let mut records = Vec::with_capacity(circuit.n_records as usize);
    for op in &circuit.ops {
        match *op {
            Op::Reset(q) => {
                frame.x[q as usize] = 0;
                frame.z[q as usize] = 0;
            }
            Op::H(q) => {
                let q = q as usize;
                std::mem::swap(&mut frame.x[q], &mut frame.z[q]);
            }
            Op::Cz(a, b) => {
                frame.z[a as usize] ^= frame.x[b as usize];
                frame.z[b as usize] ^= frame.x[a as usize];
            }
            Op::Measure(q) => records.push(frame.x[q as usize]),
            Op::Fault(s) => on_fault(s, &mut frame),
            Op::IdleMark(_) | Op::Detector(_) | Op::Tick => {}
        }
    }
    debug_assert_eq!(records.len(), circuit.n_records as usize);
    records
}

/// XOR the referenced record words into detector words and the observable.
pub(crate) fn assemble(circuit: &Circuit, records: &[u64]) -> ShotBatch {
    let detectors = circuit
        .detectors
        .iter()
        .map(|det| det.records.iter().fold(0u64, |acc, &r| acc ^ records[r as usize]))
        .collect();
    let observable = circuit
        .observable
        .iter()
        .fold(0u64, |acc, &r| acc ^ records[r as usize]);
    ShotBatch { detectors, observable }
}

/// Failures before the next success of a Bernoulli(p) trial, p = 1 - e^ln_q.
#[inline]
fn geometric(rng: &mut ChaCha12Rng, ln_q: f64) -> u64 {
    let u: f64 = rng.gen();
    let g = ((1.0 - u).ln() / ln_q).floor();
    if g >= u64::MAX as f64 {
        u64::MAX
    } else {
        g as u64
    }
}

/// Sample 64 shots; lane l of every output word is shot `batch * 64 + l`.
///
/// Identical (circuit, seed, batch) always produces identical bits; batches
/// use independent RNG streams so execution order is irrelevant.
pub fn sample_batch(circuit: &Circuit, seed: u64, batch: u64) -> ShotBatch {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(batch);

    // Pass 1: fire (site, lane) pairs per probability class.
    let mut masks = vec![0u64; circuit.sites.len()];
    for class in &circuit.classes {
        let trials = class.sites.len() as u64 * 64;
        let ln_q = (1.0 - class.p).ln();
        let mut i = geometric(&mut rng, ln_q);
        while i < trials {
            masks[class.sites[(i / 64) as usize] as usize] |= 1u64 << (i % 64);
            i = i.saturating_add(1).saturating_add(geometric(&mut rng, ln_q));
        }
    }

    // Pass 2: propagate, expanding fired sites into uniform components.
    let records = run_frames(circuit, |s, frame| {
        let fired = masks[s as usize];
        if fired == 0 {
            return;
        }
        let site = &circuit.sites[s as usize];
        let comps = circuit.classes[site.class as usize].kind.components();
        let mut m = fired;
        while m != 0 {
            let lane = 1u64 << m.trailing_zeros();
            m &= m - 1;
            let comp = if comps.len() == 1 {
                comps[0]
            } else {
                comps[rng.gen_range(0..comps.len())]
            };
            for (slot, pauli) in comp.iter().enumerate() {
                if let Some(p) = pauli {
                    frame.apply(site.qubits[slot], *p, lane);
                }
            }
        }
    });
    assemble(circuit, &records)
}

/// Validate fault references and group component picks by site.
pub(crate) fn group_faults(
    circuit: &Circuit,
    faults: &[FaultRef],
) -> Result<std::collections::HashMap<u32, Vec<u8>>> {
    let mut by_site: std::collections::HashMap<u32, Vec<u8>> = Default::default();
    for fault in faults {
        let site = circuit
            .sites
            .get(fault.site as usize)
            .ok_or_else(|| Error::Validation(format!("unknown fault site {}", fault.site)))?;
        let n_comps = circuit.classes[site.class as usize].kind.components().len();
        if fault.component as usize >= n_comps {
            return Err(Error::Validation(format!(
                "site {} has {n_comps} components, got index {}",
                fault.site, fault.component
            )));
        }
        by_site.entry(fault.site).or_default().push(fault.component);
    }
    Ok(by_site)
}

/// Apply exactly the forced fault components (no randomness) and report the
/// resulting detection events and observable flip.
pub fn inject(circuit: &Circuit, faults: &[FaultRef]) -> Result<InjectOutcome> {
    let by_site = group_faults(circuit, faults)?;
    let records = run_frames(circuit, |s, frame| {
        let Some(comps) = by_site.get(&s) else { return };
        let site = &circuit.sites[s as usize];
        let table = circuit.classes[site.class as usize].kind.components();
        for &c in comps {
            for (slot, pauli) in table[c as usize].iter().enumerate() {
                if let Some(p) = pauli {
                    frame.apply(site.qubits[slot], *p, 1);
                }
            }
        }
    });
    let batch = assemble(circuit, &records);
    Ok(InjectOutcome {
        detectors: batch
            .detectors
            .iter()
            .enumerate()
            .filter_map(|(d, &w)| (w & 1 == 1).then_some(d as u32))
            .collect(),
        observable: batch.observable & 1 == 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{
        build_memory_circuit, Basis, CzErrorSource, FaultCtx, NoiseParams, ShuttleChannel,
    };
    use crate::geom::{build_layout, StabKind};

    fn noise(cer: f64, ber: f64, shuttle: ShuttleChannel) -> NoiseParams {
        NoiseParams { cer, ber, shuttle, cz_source: CzErrorSource::Cer }
    }

    fn d3_circuit(rounds: u32, n: NoiseParams) -> crate::circuit::Circuit {
        let layout = build_layout(3).unwrap();
        build_memory_circuit(&layout, rounds, Basis::Z, &n).unwrap()
    }

    /// Detector id for the given coordinates.
    fn det_id(c: &crate::circuit::Circuit, kind: StabKind, stab: u32, round: u32) -> u32 {
        c.detectors
            .iter()
            .position(|d| d.kind == kind && d.stab == stab && d.round == round)
            .unwrap() as u32
    }

    #[test]
    fn test_noiseless_batches_are_all_zero() {
        let circuit = d3_circuit(3, NoiseParams::noiseless());
        for batch in 0..4 {
            let out = sample_batch(&circuit, 7, batch);
            assert!(out.detectors.iter().all(|&w| w == 0));
            assert_eq!(out.observable, 0);
        }
    }

    #[test]
    fn test_sampling_is_deterministic_and_stream_independent() {
        let circuit = d3_circuit(3, noise(0.01, 0.02, ShuttleChannel::Unbiased));
        let a0 = sample_batch(&circuit, 42, 0);
        let a1 = sample_batch(&circuit, 42, 1);
        // Re-running in the opposite order gives identical bits.
        let b1 = sample_batch(&circuit, 42, 1);
        let b0 = sample_batch(&circuit, 42, 0);
        assert_eq!(a0, b0);
        assert_eq!(a1, b1);
        assert_ne!(a0, a1);
        // A different seed decorrelates.
        assert_ne!(sample_batch(&circuit, 43, 0), a0);
    }

    #[test]
    fn test_empty_injection_is_all_zero() {
        let circuit = d3_circuit(3, noise(0.01, 0.0, ShuttleChannel::Unbiased));
        let out = inject(&circuit, &[]).unwrap();
        assert!(out.detectors.is_empty());
        assert!(!out.observable);
    }

    #[test]
    fn test_unknown_fault_rejected() {
        let circuit = d3_circuit(1, noise(0.01, 0.0, ShuttleChannel::Unbiased));
        assert!(inject(&circuit, &[FaultRef { site: 999_999, component: 0 }]).is_err());
        assert!(inject(&circuit, &[FaultRef { site: 0, component: 200 }]).is_err());
    }

    #[test]
    fn test_data_x_between_rounds_fires_adjacent_z_pair() {
        // An X flip on the central data qubit (id 4) while it idles through
        // the round-1 readout step must fire exactly its two Z-stabilizer
        // detectors in the round-2 difference layer.
        let circuit = d3_circuit(3, noise(0.01, 0.0, ShuttleChannel::Unbiased));
        let site = circuit
            .sites
            .iter()
            .position(|s| {
                circuit.classes[s.class as usize].ctx == FaultCtx::Idle
                    && s.qubits[0] == 4
                    && s.step == 10 // step 0 init + round-1 steps 1..=10
            })
            .unwrap() as u32;
        // Depolarize1 component 0 is X.
        let out = inject(&circuit, &[FaultRef { site, component: 0 }]).unwrap();
        let z11 = det_id(&circuit, StabKind::Z, 1, 2); // stab index 1 = center (1,1)
        let z33 = det_id(&circuit, StabKind::Z, 2, 2); // stab index 2 = center (3,3)
        assert_eq!(out.detectors, vec![z11.min(z33), z11.max(z33)]);
        assert!(!out.observable);
    }

    #[test]
    fn test_measurement_flip_fires_time_adjacent_pair() {
        // A spam X flip right before a mid-run ancilla readout flips that
        // round's outcome only: the detector pair at rounds r and r+1.
        let circuit = d3_circuit(3, noise(0.01, 0.0, ShuttleChannel::Unbiased));
        let layout = build_layout(3).unwrap();
        let anc = layout.z_stabilizers[1].ancilla; // center (1,1)
        let site = circuit
            .sites
            .iter()
            .position(|s| {
                circuit.classes[s.class as usize].ctx == FaultCtx::Spam
                    && s.qubits[0] == anc
                    && s.step == 10 + 10 // readout step of round 2
            })
            .unwrap() as u32;
        let out = inject(&circuit, &[FaultRef { site, component: 0 }]).unwrap();
        let expected = vec![
            det_id(&circuit, StabKind::Z, 1, 2),
            det_id(&circuit, StabKind::Z, 1, 3),
        ];
        assert_eq!(out.detectors, expected);
        assert!(!out.observable);
    }

    #[test]
    fn test_injection_is_linear_over_fault_sets() {
        // Frames are GF(2)-linear: the outcome of a joint injection is the
        // XOR of single-fault outcomes.
        let circuit = d3_circuit(2, noise(0.01, 0.02, ShuttleChannel::Unbiased));
        let all: Vec<FaultRef> = circuit.components().map(|(r, ..)| r).collect();
        // A fixed spread of components across the circuit.
        let picks: Vec<FaultRef> =
            all.iter().step_by(all.len() / 17).copied().take(17).collect();
        let joint = inject(&circuit, &picks).unwrap();
        let mut dets = std::collections::HashSet::new();
        let mut obs = false;
        for f in &picks {
            let single = inject(&circuit, &[*f]).unwrap();
            for d in single.detectors {
                if !dets.insert(d) {
                    dets.remove(&d);
                }
            }
            obs ^= single.observable;
        }
        let mut expected: Vec<u32> = dets.into_iter().collect();
        expected.sort_unstable();
        assert_eq!(joint.detectors, expected);
        assert_eq!(joint.observable, obs);
    }

    #[test]
    fn test_biased_shuttle_detector_rate_matches_binomial() {
        // With cer = 0 and biased shuttling, the only faults flipping the
        // round-1 outcome of a bulk stabilizer are its own four shuttle Z
        // flips, so its anchor detector fires with P(odd of Binomial(4, p)).
        let p = 0.02;
        let circuit = d3_circuit(2, noise(0.0, p, ShuttleChannel::Biased));
        let layout = build_layout(3).unwrap();
        let det = det_id(&circuit, StabKind::Z, 1, 1) as usize;
        assert_eq!(layout.z_stabilizers[1].weight(), 4);

        let shots = 1_000_000u64;
        let mut fired = 0u64;
        for batch in 0..shots / 64 {
            fired += sample_batch(&circuit, 99, batch).detectors[det].count_ones() as u64;
        }
        let expected = (1.0 - (1.0 - 2.0 * p).powi(4)) / 2.0;
        let emp = fired as f64 / shots as f64;
        let sigma = (expected * (1.0 - expected) / shots as f64).sqrt();
        assert!(
            (emp - expected).abs() < 4.0 * sigma,
            "empirical {emp} vs expected {expected} (sigma {sigma})"
        );
    }

    #[test]
    fn test_unbiased_site_fire_rate() {
        // Fire frequency of any single class follows its probability: check
        // the total fault activity via a single-site class. The init-reset
        // spam class at cer only exists on data; compare the round-1 anchor
        // rate of a weight-2 stabilizer against an exact small formula is
        // already covered above, so here just check rough scaling: doubling
        // cer roughly doubles the mean number of fired detectors per shot.
        let c1 = d3_circuit(2, noise(0.002, 0.0, ShuttleChannel::Unbiased));
        let c2 = d3_circuit(2, noise(0.004, 0.0, ShuttleChannel::Unbiased));
        let mean = |c: &crate::circuit::Circuit| -> f64 {
            let mut total = 0u64;
            for batch in 0..2000 {
                total += sample_batch(c, 5, batch)
                    .detectors
                    .iter()
                    .map(|w| w.count_ones() as u64)
                    .sum::<u64>();
            }
            total as f64 / (2000.0 * 64.0)
        };
        let (m1, m2) = (mean(&c1), mean(&c2));
        let ratio = m2 / m1;
        assert!((1.8..2.2).contains(&ratio), "ratio {ratio}");
    }
}
