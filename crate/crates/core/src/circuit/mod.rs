//! Scheduled stabilizer-measurement circuits with tagged fault locations.
//!
//! A circuit is a flat instruction stream over qubit ids:
//! - gates: RESET_Z, H, CZ, MEASURE_Z, plus IDLE_MARK placeholders so that
//!   every qubit appears exactly once per TICK-delimited step;
//! - fault sites: positions where a noise channel may fire, grouped into
//!   probability classes (one class per channel role and rate);
//! - detectors: parities of measurement records that are deterministic under
//!   zero noise; the logical observable is a parity of final data readouts.
//!
//! Submodules: [`build`] emits memory experiments on a [`crate::geom::Layout`],
//! [`text`] round-trips the documented line format, [`distance`] searches for
//! low-weight undetectable logical fault combinations.

pub mod build;
pub mod distance;
pub mod text;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geom::{Pauli, QubitId, StabKind};

pub use build::build_memory_circuit;
pub use distance::{circuit_distance, DistanceBound};
pub use text::{parse, serialize};

/// Memory-experiment basis: which logical operator the run protects and reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Basis {
    /// Data prepared in |0..0>, final transversal Z readout, logical Z observable.
    Z,
    /// Data prepared in |+..+>, final transversal X readout, logical X observable.
    X,
}

impl Basis {
    /// Stabilizer kind whose outcomes are deterministic from the first round.
    pub fn memory_kind(self) -> StabKind {
        match self {
            Basis::Z => StabKind::Z,
            Basis::X => StabKind::X,
        }
    }
}

/// Shuttle noise channel applied to an ancilla before each of its CZ gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ShuttleChannel {
    /// Single-qubit depolarizing with probability ber.
    Unbiased,
    /// Pure dephasing: Z flip with probability ber.
    Biased,
}

/// Which rate feeds the two-qubit depolarizing channel after each CZ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CzErrorSource {
    Cer,
    Ber,
}

/// Noise model: a circuit error rate, a bus error rate, and channel switches.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseParams {
    pub cer: f64,
    pub ber: f64,
    pub shuttle: ShuttleChannel,
    pub cz_source: CzErrorSource,
}

impl NoiseParams {
    /// Noise model with every rate zero (no fault sites emitted).
    pub fn noiseless() -> Self {
        NoiseParams {
            cer: 0.0,
            ber: 0.0,
            shuttle: ShuttleChannel::Unbiased,
            cz_source: CzErrorSource::Cer,
        }
    }

    /// Probability driving the post-CZ two-qubit depolarizing channel.
    pub fn cz_probability(&self) -> f64 {
        match self.cz_source {
            CzErrorSource::Cer => self.cer,
            CzErrorSource::Ber => self.ber,
        }
    }

    /// Rates must be probabilities below 1/2 so edge weights stay positive.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("cer", self.cer), ("ber", self.ber)] {
            if !(0.0..0.5).contains(&value) || !value.is_finite() {
                return Err(Error::InvalidProbability { name, value });
            }
        }
        Ok(())
    }
}

/// Noise channel shape; fixes the elementary Pauli components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelKind {
    XFlip,
    ZFlip,
    Depolarize1,
    Depolarize2,
}

/// One elementary outcome of a channel: a Pauli on each targeted qubit
/// (None = identity on that slot).
pub type Component = [Option<Pauli>; 2];

const XFLIP_COMPONENTS: [Component; 1] = [[Some(Pauli::X), None]];
const ZFLIP_COMPONENTS: [Component; 1] = [[Some(Pauli::Z), None]];
const DEPOL1_COMPONENTS: [Component; 3] = [
    [Some(Pauli::X), None],
    [Some(Pauli::Y), None],
    [Some(Pauli::Z), None],
];
const DEPOL2_COMPONENTS: [Component; 15] = [
    [None, Some(Pauli::X)],
    [None, Some(Pauli::Y)],
    [None, Some(Pauli::Z)],
    [Some(Pauli::X), None],
    [Some(Pauli::X), Some(Pauli::X)],
    [Some(Pauli::X), Some(Pauli::Y)],
    [Some(Pauli::X), Some(Pauli::Z)],
    [Some(Pauli::Y), None],
    [Some(Pauli::Y), Some(Pauli::X)],
    [Some(Pauli::Y), Some(Pauli::Y)],
    [Some(Pauli::Y), Some(Pauli::Z)],
    [Some(Pauli::Z), None],
    [Some(Pauli::Z), Some(Pauli::X)],
    [Some(Pauli::Z), Some(Pauli::Y)],
    [Some(Pauli::Z), Some(Pauli::Z)],
];

impl ChannelKind {
    /// Equiprobable elementary components; a fired site picks exactly one.
    pub fn components(self) -> &'static [Component] {
        match self {
            ChannelKind::XFlip => &XFLIP_COMPONENTS,
            ChannelKind::ZFlip => &ZFLIP_COMPONENTS,
            ChannelKind::Depolarize1 => &DEPOL1_COMPONENTS,
            ChannelKind::Depolarize2 => &DEPOL2_COMPONENTS,
        }
    }

    /// Number of targeted qubits (1 or 2).
    pub fn arity(self) -> usize {
        match self {
            ChannelKind::Depolarize2 => 2,
            _ => 1,
        }
    }
}

/// Role a fault site plays in the schedule; determines its probability class
/// together with the channel kind and rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaultCtx {
    /// X flip after a reset or before a measurement.
    Spam,
    /// Single-qubit depolarizing after an H gate.
    Gate,
    /// Bus channel on an ancilla before one of its CZ gates.
    Shuttle,
    /// Two-qubit depolarizing after a CZ.
    Cz,
    /// Single-qubit depolarizing on a qubit idling through a step.
    Idle,
}

impl FaultCtx {
    pub fn label(self) -> &'static str {
        match self {
            FaultCtx::Spam => "spam",
            FaultCtx::Gate => "gate",
            FaultCtx::Shuttle => "shuttle",
            FaultCtx::Cz => "cz",
            FaultCtx::Idle => "idle",
        }
    }
}

/// Probability class: all sites sharing a role, channel shape, and rate.
/// The sampler draws per-class so that rare classes cost nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbClass {
    pub ctx: FaultCtx,
    pub kind: ChannelKind,
    pub p: f64,
    /// Member sites in op-stream order.
    pub sites: Vec<u32>,
}

/// One position in the circuit where a noise channel may fire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaultSite {
    /// Index into [`Circuit::classes`].
    pub class: u16,
    /// Targets; for arity-1 channels both entries equal the single target.
    pub qubits: [QubitId; 2],
    /// Global step index (0-based) the site belongs to.
    pub step: u32,
}

/// Reference to one elementary fault: a site and a component index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FaultRef {
    pub site: u32,
    pub component: u8,
}

/// Flat circuit instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Reset(QubitId),
    H(QubitId),
    Cz(QubitId, QubitId),
    Measure(QubitId),
    IdleMark(QubitId),
    /// Index into [`Circuit::sites`].
    Fault(u32),
    /// Index into [`Circuit::detectors`]; placed right after its last record.
    Detector(u32),
    /// Step separator.
    Tick,
}

/// Detector: a parity of measurement records, deterministic under zero noise.
///
/// Coordinates: `(kind, stab, round)` where `stab` indexes the kind's sorted
/// stabilizer list and `round` runs 1..=rounds for ancilla comparisons, with
/// `rounds+1` marking the final reconstruction from data readouts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Detector {
    pub kind: StabKind,
    pub stab: u32,
    pub round: u32,
    /// Absolute measurement-record indices, ascending.
    pub records: Vec<u32>,
}

/// Complete memory-experiment circuit; immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub distance: u32,
    pub rounds: u32,
    pub basis: Basis,
    pub noise: NoiseParams,
    pub n_qubits: u32,
    pub ops: Vec<Op>,
    pub sites: Vec<FaultSite>,
    pub classes: Vec<ProbClass>,
    pub detectors: Vec<Detector>,
    /// Absolute record indices whose parity is the logical readout.
    pub observable: Vec<u32>,
    pub n_records: u32,
    pub n_steps: u32,
}

/// Census of fault sites and elementary components by role and channel.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FaultCensus {
    pub sites_by_class: BTreeMap<(FaultCtx, ChannelKind), usize>,
    pub total_sites: usize,
    pub total_components: usize,
}

impl Circuit {
    /// Probability class of a site.
    pub fn class_of(&self, site: u32) -> &ProbClass {
        &self.classes[self.sites[site as usize].class as usize]
    }

    /// All elementary faults in op-stream order: (ref, targets, component, probability).
    pub fn components(
        &self,
    ) -> impl Iterator<Item = (FaultRef, [QubitId; 2], Component, f64)> + '_ {
        self.sites.iter().enumerate().flat_map(move |(s, site)| {
            let class = &self.classes[site.class as usize];
            let comps = class.kind.components();
            let p_each = class.p / comps.len() as f64;
            comps.iter().enumerate().map(move |(c, comp)| {
                (
                    FaultRef { site: s as u32, component: c as u8 },
                    site.qubits,
                    *comp,
                    p_each,
                )
            })
        })
    }

    /// Count sites and components per (role, channel) class.
    pub fn census(&self) -> FaultCensus {
        let mut census = FaultCensus::default();
        for site in &self.sites {
            let class = &self.classes[site.class as usize];
            *census.sites_by_class.entry((class.ctx, class.kind)).or_insert(0) += 1;
            census.total_sites += 1;
            census.total_components += class.kind.components().len();
        }
        census
    }

    /// Structural invariants; [`build_memory_circuit`] output always passes.
    ///
    /// Checks: step structure (TICK count), every qubit exactly once per step
    /// among gates and idle marks, CZ targets distinct, fault/detector/record
    /// references in range, class probabilities valid, detector count formula.
    pub fn validate(&self) -> Result<()> {
        let d = self.distance as u64;
        if self.n_qubits as u64 != 2 * d * d - 1 {
            return Err(Error::Validation(format!(
                "qubit count {} != 2d^2-1 for d={d}",
                self.n_qubits
            )));
        }

        let mut step = 0u32;
        let mut seen_in_step: Vec<u32> = vec![u32::MAX; self.n_qubits as usize];
        let mut records = 0u32;
        let mut det_seen = 0u32;
        let touch = |q: QubitId, step: u32, seen: &mut Vec<u32>| -> Result<()> {
            if q >= self.n_qubits {
                return Err(Error::Validation(format!("qubit {q} out of range")));
            }
            if seen[q as usize] == step {
                return Err(Error::Validation(format!(
                    "qubit {q} acted on twice in step {step}"
                )));
            }
            seen[q as usize] = step;
            Ok(())
        };
        for op in &self.ops {
            match *op {
                Op::Reset(q) | Op::H(q) | Op::Measure(q) | Op::IdleMark(q) => {
                    touch(q, step, &mut seen_in_step)?;
                    if let Op::Measure(_) = op {
                        records += 1;
                    }
                }
                Op::Cz(a, b) => {
                    if a == b {
                        return Err(Error::Validation(format!("CZ with repeated target {a}")));
                    }
                    touch(a, step, &mut seen_in_step)?;
                    touch(b, step, &mut seen_in_step)?;
                }
                Op::Fault(s) => {
                    let site = self
                        .sites
                        .get(s as usize)
                        .ok_or_else(|| Error::Validation(format!("fault site {s} out of range")))?;
                    if site.step != step {
                        return Err(Error::Validation(format!(
                            "site {s} recorded step {} but appears in step {step}",
                            site.step
                        )));
                    }
                    let class =
                        self.classes.get(site.class as usize).ok_or_else(|| {
                            Error::Validation(format!("site {s} references missing class"))
                        })?;
                    if class.kind.arity() == 2 && site.qubits[0] == site.qubits[1] {
                        return Err(Error::Validation(format!(
                            "two-qubit site {s} with repeated target"
                        )));
                    }
                }
                Op::Detector(id) => {
                    if id != det_seen {
                        return Err(Error::Validation(format!(
                            "detector {id} emitted out of order (expected {det_seen})"
                        )));
                    }
                    det_seen += 1;
                    let det = &self.detectors[id as usize];
                    for pair in det.records.windows(2) {
                        if pair[0] >= pair[1] {
                            return Err(Error::Validation(format!(
                                "detector {id} records not strictly ascending"
                            )));
                        }
                    }
                    if det.records.iter().any(|&r| r >= records) {
                        return Err(Error::Validation(format!(
                            "detector {id} references a future record"
                        )));
                    }
                }
                Op::Tick => {
                    step += 1;
                }
            }
        }
        if step != self.n_steps {
            return Err(Error::Validation(format!(
                "tick count {step} != declared steps {}",
                self.n_steps
            )));
        }
        if records != self.n_records {
            return Err(Error::Validation(format!(
                "record count {records} != declared {}",
                self.n_records
            )));
        }
        if det_seen != self.detectors.len() as u32 {
            return Err(Error::Validation("not all detectors emitted in ops".into()));
        }

        // Per-round width: init steps + 10 per round + final steps.
        let init_steps = match self.basis {
            Basis::Z => 1,
            Basis::X => 2,
        };
        let final_steps = init_steps;
        let expected = init_steps + 10 * self.rounds + final_steps;
        if self.n_steps != expected {
            return Err(Error::Validation(format!(
                "step count {} != expected {expected}",
                self.n_steps
            )));
        }

        // Detector census: memory kind rounds+1 per stabilizer, other kind rounds-1.
        let per_kind = (d * d - 1) / 2;
        let expected_dets = per_kind * (self.rounds as u64 + 1) + per_kind * (self.rounds as u64 - 1);
        if self.detectors.len() as u64 != expected_dets {
            return Err(Error::Validation(format!(
                "detector count {} != (d^2-1)*rounds = {expected_dets}",
                self.detectors.len()
            )));
        }

        for class in &self.classes {
            if !(0.0 < class.p && class.p < 0.5) {
                return Err(Error::InvalidProbability { name: "class", value: class.p });
            }
        }
        for (i, site) in self.sites.iter().enumerate() {
            for q in site.qubits {
                if q >= self.n_qubits {
                    return Err(Error::Validation(format!("site {i} targets bad qubit {q}")));
                }
            }
        }
        if self.observable.is_empty() || self.observable.len() != self.distance as usize {
            return Err(Error::Validation(format!(
                "observable has {} records, expected {}",
                self.observable.len(),
                self.distance
            )));
        }
        Ok(())
    }
}
