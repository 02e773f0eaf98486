//! Memory-experiment builder: 10-step CZ schedule with bus-noise fault sites.
//!
//! Round schedule (steps 1..10):
//! 1. reset ancillas; 2. H on ancillas and on data entering an X-basis window;
//! 3. CZ layer 1; 4. data H between windows; 5. CZ layer 2; 6. CZ layer 3;
//! 7. data H between windows; 8. CZ layer 4; 9. H on ancillas and on data
//! leaving an X-basis window; 10. measure ancillas.
//!
//! Data-qubit H dressing is derived per qubit from the three CZ windows
//! {layer 1}, {layers 2+3}, {layer 4}: the qubit sits in the X basis exactly
//! during windows where it meets an X-stabilizer CZ, so CZ (a native ZZ-phase
//! gate) implements the required XX coupling there. A window mixing both
//! stabilizer kinds on one qubit would be unschedulable and is rejected.
//!
//! Noise placement: X flip (cer) after each reset and before each measurement;
//! single-qubit depolarizing (cer) after each H; shuttle channel (ber) on the
//! ancilla before each of its CZs; two-qubit depolarizing after each CZ;
//! single-qubit depolarizing (cer) on every qubit idling through a step.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::{Layout, QubitId, StabKind, Stabilizer};

use super::{
    Basis, ChannelKind, Circuit, Detector, FaultCtx, FaultSite, NoiseParams, Op, ProbClass,
    ShuttleChannel,
};

/// CZ layer index -> step index within the round (0-based steps).
const LAYER_STEP: [usize; 4] = [2, 4, 5, 7];

struct Emitter {
    noise: NoiseParams,
    n_qubits: u32,
    ops: Vec<Op>,
    sites: Vec<FaultSite>,
    classes: Vec<ProbClass>,
    class_ids: HashMap<(FaultCtx, ChannelKind, u64), u16>,
    records: u32,
    step: u32,
    acted: Vec<bool>,
}

impl Emitter {
    fn new(noise: NoiseParams, n_qubits: u32) -> Self {
        Emitter {
            noise,
            n_qubits,
            ops: Vec::new(),
            sites: Vec::new(),
            classes: Vec::new(),
            class_ids: HashMap::new(),
            records: 0,
            step: 0,
            acted: vec![false; n_qubits as usize],
        }
    }

    fn act(&mut self, q: QubitId) {
        debug_assert!(!self.acted[q as usize], "qubit {q} acted twice in step");
        self.acted[q as usize] = true;
    }

    fn fault(&mut self, ctx: FaultCtx, kind: ChannelKind, p: f64, qubits: [QubitId; 2]) {
        if p == 0.0 {
            return;
        }
        let key = (ctx, kind, p.to_bits());
        let next_id = self.classes.len() as u16;
        let class = *self.class_ids.entry(key).or_insert_with(|| {
            self.classes.push(ProbClass { ctx, kind, p, sites: Vec::new() });
            next_id
        });
        let site_id = self.sites.len() as u32;
        self.classes[class as usize].sites.push(site_id);
        self.sites.push(FaultSite { class, qubits, step: self.step });
        self.ops.push(Op::Fault(site_id));
    }

    fn reset(&mut self, q: QubitId) {
        self.act(q);
        self.ops.push(Op::Reset(q));
    }

    fn h(&mut self, q: QubitId) {
        self.act(q);
        self.ops.push(Op::H(q));
    }

    fn measure(&mut self, q: QubitId) -> u32 {
        self.act(q);
        self.ops.push(Op::Measure(q));
        self.records += 1;
        self.records - 1
    }

    /// Close the step: idle-mark and idle-depolarize every untouched qubit.
    fn end_step(&mut self) {
        let idle: Vec<QubitId> =
            (0..self.n_qubits).filter(|&q| !self.acted[q as usize]).collect();
        for &q in &idle {
            self.ops.push(Op::IdleMark(q));
        }
        for &q in &idle {
            self.fault(FaultCtx::Idle, ChannelKind::Depolarize1, self.noise.cer, [q, q]);
        }
        self.ops.push(Op::Tick);
        self.step += 1;
        self.acted.fill(false);
    }
}

/// Per-data-qubit basis plan over the three CZ windows (false = Z, true = X).
fn window_plan(layout: &Layout) -> Result<Vec<[bool; 3]>> {
    let n_data = layout.n_data() as usize;
    // window of a CZ layer: layer 0 -> 0, layers 1,2 -> 1, layer 3 -> 2.
    let window_of = [0usize, 1, 1, 2];
    let mut kinds: Vec<[Option<StabKind>; 3]> = vec![[None; 3]; n_data];
    for stab in layout.stabilizers() {
        for (layer, slot) in stab.slots.iter().enumerate() {
            let Some(q) = *slot else { continue };
            let w = window_of[layer];
            let cell = &mut kinds[q as usize][w];
            match *cell {
                None => *cell = Some(stab.kind),
                Some(k) if k == stab.kind => {}
                Some(_) => {
                    return Err(Error::Validation(format!(
                        "data qubit {q} meets both stabilizer kinds in CZ window {w}"
                    )))
                }
            }
        }
    }
    Ok(kinds
        .into_iter()
        .map(|ws| ws.map(|k| k == Some(StabKind::X)))
        .collect())
}

/// Build the full noisy memory experiment on a layout.
///
/// The circuit is: data initialization in the memory basis, `rounds` rounds of
/// the 10-step schedule, transversal data readout; detectors are first-round
/// anchors of the memory kind, consecutive-round differences for all
/// stabilizers, and a final reconstruction of the memory kind from the data
/// readout; the observable is the memory-basis logical operator.
pub fn build_memory_circuit(
    layout: &Layout,
    rounds: u32,
    basis: Basis,
    noise: &NoiseParams,
) -> Result<Circuit> {
    if rounds < 1 {
        return Err(Error::InvalidParameter(format!("rounds must be >= 1, got {rounds}")));
    }
    noise.validate()?;

    let n_data = layout.n_data();
    let n_anc = layout.ancilla_qubits.len() as u32;
    let n_qubits = layout.n_qubits();
    let mem_kind = basis.memory_kind();
    let cer = noise.cer;

    // CZ layers ordered by ancilla id; shuttle channel shape.
    let mut cz_layers: [Vec<(QubitId, QubitId)>; 4] = Default::default();
    for stab in layout.stabilizers() {
        for (layer, slot) in stab.slots.iter().enumerate() {
            if let Some(q) = *slot {
                cz_layers[layer].push((stab.ancilla, q));
            }
        }
    }
    for layer in &mut cz_layers {
        layer.sort_unstable();
    }
    let shuttle_kind = match noise.shuttle {
        ShuttleChannel::Unbiased => ChannelKind::Depolarize1,
        ShuttleChannel::Biased => ChannelKind::ZFlip,
    };

    // Data H dressing from window transitions; windows start and end in the
    // memory-agnostic Z basis (init/final rotations are separate steps).
    let plan = window_plan(layout)?;
    let h_steps: [Vec<QubitId>; 4] = {
        let mut h = [vec![], vec![], vec![], vec![]];
        for (q, w) in plan.iter().enumerate() {
            let q = q as QubitId;
            if w[0] {
                h[0].push(q);
            }
            if w[0] != w[1] {
                h[1].push(q);
            }
            if w[1] != w[2] {
                h[2].push(q);
            }
            if w[2] {
                h[3].push(q);
            }
        }
        h
    };
    // h step index within round -> which list: step 1 -> 0, 3 -> 1, 6 -> 2, 8 -> 3.

    let mut em = Emitter::new(*noise, n_qubits);
    let mut detectors: Vec<Detector> = Vec::new();

    let rec_anc = |round: u32, stab: &Stabilizer| (round - 1) * n_anc + (stab.ancilla - n_data);
    let rec_data = |q: QubitId| rounds * n_anc + q;

    let mut push_detector = |em: &mut Emitter, kind, stab, round, mut records: Vec<u32>| {
        records.sort_unstable();
        let id = detectors.len() as u32;
        detectors.push(Detector { kind, stab, round, records });
        em.ops.push(Op::Detector(id));
    };

    // Initialization: reset all data (noisy), plus a rotation step for X memory.
    for q in 0..n_data {
        em.reset(q);
    }
    for q in 0..n_data {
        em.fault(FaultCtx::Spam, ChannelKind::XFlip, cer, [q, q]);
    }
    em.end_step();
    if basis == Basis::X {
        for q in 0..n_data {
            em.h(q);
        }
        for q in 0..n_data {
            em.fault(FaultCtx::Gate, ChannelKind::Depolarize1, cer, [q, q]);
        }
        em.end_step();
    }

    for round in 1..=rounds {
        for step in 0..10usize {
            match step {
                0 => {
                    for a in n_data..n_qubits {
                        em.reset(a);
                    }
                    for a in n_data..n_qubits {
                        em.fault(FaultCtx::Spam, ChannelKind::XFlip, cer, [a, a]);
                    }
                }
                1 | 3 | 6 | 8 => {
                    let h_idx = match step {
                        1 => 0,
                        3 => 1,
                        6 => 2,
                        _ => 3,
                    };
                    let mut targets = h_steps[h_idx].clone();
                    if step == 1 || step == 8 {
                        targets.extend(n_data..n_qubits);
                    }
                    for &q in &targets {
                        em.h(q);
                    }
                    for &q in &targets {
                        em.fault(FaultCtx::Gate, ChannelKind::Depolarize1, cer, [q, q]);
                    }
                }
                2 | 4 | 5 | 7 => {
                    let layer = LAYER_STEP.iter().position(|&s| s == step).unwrap();
                    let pairs = &cz_layers[layer];
                    for &(a, _) in pairs {
                        em.fault(FaultCtx::Shuttle, shuttle_kind, noise.ber, [a, a]);
                    }
                    for &(a, d) in pairs {
                        em.act(a);
                        em.act(d);
                        em.ops.push(Op::Cz(a, d));
                    }
                    for &(a, d) in pairs {
                        em.fault(
                            FaultCtx::Cz,
                            ChannelKind::Depolarize2,
                            noise.cz_probability(),
                            [a, d],
                        );
                    }
                }
                9 => {
                    for a in n_data..n_qubits {
                        em.fault(FaultCtx::Spam, ChannelKind::XFlip, cer, [a, a]);
                    }
                    let mut recs = Vec::with_capacity(n_anc as usize);
                    for a in n_data..n_qubits {
                        recs.push(em.measure(a));
                    }
                    debug_assert!(recs
                        .iter()
                        .enumerate()
                        .all(|(i, &r)| r == (round - 1) * n_anc + i as u32));
                    // Detectors for this round, Z-type stabilizers first.
                    for (kind, stabs) in [
                        (StabKind::Z, &layout.z_stabilizers),
                        (StabKind::X, &layout.x_stabilizers),
                    ] {
                        for (k, stab) in stabs.iter().enumerate() {
                            if round == 1 {
                                if kind == mem_kind {
                                    push_detector(
                                        &mut em,
                                        kind,
                                        k as u32,
                                        1,
                                        vec![rec_anc(1, stab)],
                                    );
                                }
                            } else {
                                push_detector(
                                    &mut em,
                                    kind,
                                    k as u32,
                                    round,
                                    vec![rec_anc(round - 1, stab), rec_anc(round, stab)],
                                );
                            }
                        }
                    }
                }
                _ => unreachable!(),
            }
            em.end_step();
        }
    }

    // Final readout: undo the X-memory rotation, then measure all data.
    if basis == Basis::X {
        for q in 0..n_data {
            em.h(q);
        }
        for q in 0..n_data {
            em.fault(FaultCtx::Gate, ChannelKind::Depolarize1, cer, [q, q]);
        }
        em.end_step();
    }
    for q in 0..n_data {
        em.fault(FaultCtx::Spam, ChannelKind::XFlip, cer, [q, q]);
    }
    for q in 0..n_data {
        let rec = em.measure(q);
        debug_assert_eq!(rec, rec_data(q));
    }
    let stabs = match mem_kind {
        StabKind::Z => &layout.z_stabilizers,
        StabKind::X => &layout.x_stabilizers,
    };
    for (k, stab) in stabs.iter().enumerate() {
        let mut records = vec![rec_anc(rounds, stab)];
        records.extend(stab.support().map(rec_data));
        push_detector(&mut em, mem_kind, k as u32, rounds + 1, records);
    }
    let logical = match basis {
        Basis::Z => &layout.logical_z,
        Basis::X => &layout.logical_x,
    };
    let observable: Vec<u32> = logical.0.keys().map(|&q| rec_data(q)).collect();
    em.end_step();

    let circuit = Circuit {
        distance: layout.distance,
        rounds,
        basis,
        noise: *noise,
        n_qubits,
        n_records: em.records,
        n_steps: em.step,
        ops: em.ops,
        sites: em.sites,
        classes: em.classes,
        detectors,
        observable,
    };
    circuit.validate()?;
    Ok(circuit)
}
