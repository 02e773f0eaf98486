//! Rotated surface-code lattice for odd distance d.
//!
//! Coordinate system:
//! - data qubits sit on even-even integer points (2i, 2j), i, j in [0, d);
//! - stabilizer ancillas sit on odd-odd plaquette centers (2i+1, 2j+1).
//!
//! Checkerboard coloring: the plaquette with index (i, j) (center at
//! (2i+1, 2j+1)) is Z-type when i+j is even, X-type otherwise. With this
//! coloring the weight-2 Z checks sit on the top/bottom boundaries and the
//! weight-2 X checks on the left/right boundaries, the logical Z is a vertical
//! Z-string (column x = 0) and the logical X a horizontal X-string (row y = 0).
//!
//! Each stabilizer orders its data support into four CZ time slots given as
//! coordinate offsets from the plaquette center. The two stabilizer types use
//! mirrored zigzag orders so that the four CZ layers are collision-free and a
//! mid-schedule ancilla X fault propagates onto a data-qubit pair oriented
//! perpendicular to the logical string it could otherwise shorten. Boundary
//! stabilizers keep the same slot pattern with their two missing slots empty.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Lattice coordinate (x, y).
pub type Coord = (i32, i32);

/// Qubit identifier; data qubits come first, then ancillas, both sorted by (y, x).
pub type QubitId = u32;

/// Stabilizer type: product of X or of Z on the data support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum StabKind {
    X,
    Z,
}

/// Single-qubit Pauli letter (identity is never stored).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    /// True when this letter anticommutes with `other`.
    pub fn anticommutes(self, other: Pauli) -> bool {
        self != other
    }
}

/// CZ slot offsets (ancilla center -> data qubit) in time-slot order.
///
/// Z-type uses an N-shaped traversal, X-type the mirror image; slots 2 and 3
/// differ in both coordinates between the types, which keeps the shared CZ
/// layers collision-free.
const Z_SLOT_OFFSETS: [Coord; 4] = [(1, 1), (-1, 1), (1, -1), (-1, -1)];
const X_SLOT_OFFSETS: [Coord; 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

/// CZ slot assignment variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SlotOrder {
    /// The hook-safe mirrored zigzag orders.
    HookSafe,
    /// Control variant: slots 2 and 3 of every Z-stabilizer swapped. Still a
    /// valid collision-free schedule, but the mid-schedule ancilla hook then
    /// propagates parallel to the logical Z string and shortens the distance.
    ZSlotsSwapped,
}

/// One stabilizer: kind, ancilla qubit, plaquette center, and its data support
/// arranged into the four CZ time slots (`None` = idle in that layer).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stabilizer {
    pub kind: StabKind,
    pub ancilla: QubitId,
    pub center: Coord,
    pub slots: [Option<QubitId>; 4],
}

impl Stabilizer {
    /// Data qubits in slot order, skipping empty slots.
    pub fn support(&self) -> impl Iterator<Item = QubitId> + '_ {
        self.slots.iter().filter_map(|s| *s)
    }

    /// Number of data qubits in the support (4 bulk, 2 boundary).
    pub fn weight(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }
}

/// Sparse multi-qubit Pauli operator over data qubits.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PauliString(pub BTreeMap<QubitId, Pauli>);

impl PauliString {
    /// Build from (qubit, letter) pairs; duplicate qubits are rejected.
    pub fn new(entries: impl IntoIterator<Item = (QubitId, Pauli)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (q, p) in entries {
            if map.insert(q, p).is_some() {
                return Err(Error::Validation(format!("duplicate qubit {q} in Pauli string")));
            }
        }
        Ok(Self(map))
    }

    /// Number of non-identity entries.
    pub fn weight(&self) -> usize {
        self.0.len()
    }

    /// Symplectic overlap parity: count of positions where the letters anticommute.
    pub fn anticommutes_with(&self, other: &PauliString) -> bool {
        let mut odd = false;
        for (q, p) in &self.0 {
            if let Some(o) = other.0.get(q) {
                if p.anticommutes(*o) {
                    odd = !odd;
                }
            }
        }
        odd
    }
}

/// Full lattice description for one distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub distance: u32,
    pub slot_order: SlotOrder,
    /// Data qubit coordinates; vector index is the qubit id.
    pub data_qubits: Vec<Coord>,
    /// Ancilla coordinates; vector index + d^2 is the qubit id.
    pub ancilla_qubits: Vec<Coord>,
    pub x_stabilizers: Vec<Stabilizer>,
    pub z_stabilizers: Vec<Stabilizer>,
    /// Vertical Z-string on the leftmost data column.
    pub logical_z: PauliString,
    /// Horizontal X-string on the topmost data row.
    pub logical_x: PauliString,
}

/// Build the hook-safe layout for odd distance d >= 3.
pub fn build_layout(distance: u32) -> Result<Layout> {
    build_layout_with(distance, SlotOrder::HookSafe)
}

/// Build a layout with an explicit CZ slot-order variant.
pub fn build_layout_with(distance: u32, slot_order: SlotOrder) -> Result<Layout> {
    if distance < 3 || distance.is_multiple_of(2) {
        return Err(Error::InvalidDistance(distance));
    }
    let d = distance as i32;

    // Data qubits at (2i, 2j), id-sorted by (y, x).
    let mut data_qubits = Vec::with_capacity((d * d) as usize);
    for j in 0..d {
        for i in 0..d {
            data_qubits.push((2 * i, 2 * j));
        }
    }
    let data_id = |c: Coord| -> Option<QubitId> {
        let (x, y) = c;
        if x < 0 || y < 0 || x > 2 * (d - 1) || y > 2 * (d - 1) || x % 2 != 0 || y % 2 != 0 {
            return None;
        }
        Some((y / 2 * d + x / 2) as QubitId)
    };

    // Plaquette centers: interior (i, j in [0, d-1)) plus the boundary
    // half-plaquettes that carry the correct check type for their side.
    let mut centers: Vec<(Coord, StabKind)> = Vec::new();
    let kind_of = |i: i64, j: i64| -> StabKind {
        if (i + j).rem_euclid(2) == 0 {
            StabKind::Z
        } else {
            StabKind::X
        }
    };
    for j in -1..d {
        for i in -1..d {
            let interior_i = i >= 0 && i < d - 1;
            let interior_j = j >= 0 && j < d - 1;
            let kind = kind_of(i as i64, j as i64);
            let keep = match (interior_i, interior_j) {
                (true, true) => true,
                // Top/bottom rows host only Z checks, left/right columns only X.
                (true, false) => kind == StabKind::Z,
                (false, true) => kind == StabKind::X,
                (false, false) => false,
            };
            if keep {
                centers.push(((2 * i + 1, 2 * j + 1), kind));
            }
        }
    }
    centers.sort_by_key(|((x, y), _)| (*y, *x));

    let n_data = (d * d) as u32;
    let mut ancilla_qubits = Vec::with_capacity(centers.len());
    let mut x_stabilizers = Vec::new();
    let mut z_stabilizers = Vec::new();
    for (idx, (center, kind)) in centers.iter().enumerate() {
        ancilla_qubits.push(*center);
        let offsets: [Coord; 4] = match (kind, slot_order) {
            (StabKind::X, _) => X_SLOT_OFFSETS,
            (StabKind::Z, SlotOrder::HookSafe) => Z_SLOT_OFFSETS,
            (StabKind::Z, SlotOrder::ZSlotsSwapped) => {
                let o = Z_SLOT_OFFSETS;
                [o[0], o[2], o[1], o[3]]
            }
        };
        let mut slots = [None; 4];
        for (s, (dx, dy)) in offsets.iter().enumerate() {
            slots[s] = data_id((center.0 + dx, center.1 + dy));
        }
        let stab = Stabilizer {
            kind: *kind,
            ancilla: n_data + idx as u32,
            center: *center,
            slots,
        };
        match kind {
            StabKind::X => x_stabilizers.push(stab),
            StabKind::Z => z_stabilizers.push(stab),
        }
    }

    let logical_z = PauliString::new((0..d).map(|j| (data_id((0, 2 * j)).unwrap(), Pauli::Z)))?;
    let logical_x = PauliString::new((0..d).map(|i| (data_id((2 * i, 0)).unwrap(), Pauli::X)))?;

    Ok(Layout {
        distance,
        slot_order,
        data_qubits,
        ancilla_qubits,
        x_stabilizers,
        z_stabilizers,
        logical_z,
        logical_x,
    })
}

impl Layout {
    /// Total qubit count (data + ancilla).
    pub fn n_qubits(&self) -> u32 {
        (self.data_qubits.len() + self.ancilla_qubits.len()) as u32
    }

    /// Number of data qubits (= d^2); ancilla ids start here.
    pub fn n_data(&self) -> u32 {
        self.data_qubits.len() as u32
    }

    /// All stabilizers, Z-type first then X-type, each id-sorted.
    pub fn stabilizers(&self) -> impl Iterator<Item = &Stabilizer> {
        self.z_stabilizers.iter().chain(self.x_stabilizers.iter())
    }

    /// Coordinate of any qubit id.
    pub fn coord(&self, q: QubitId) -> Coord {
        let nd = self.data_qubits.len();
        if (q as usize) < nd {
            self.data_qubits[q as usize]
        } else {
            self.ancilla_qubits[q as usize - nd]
        }
    }

    /// The stabilizer's support as a Pauli string of its own kind.
    pub fn stabilizer_string(&self, stab: &Stabilizer) -> PauliString {
        let p = match stab.kind {
            StabKind::X => Pauli::X,
            StabKind::Z => Pauli::Z,
        };
        PauliString::new(stab.support().map(|q| (q, p))).expect("supports are duplicate-free")
    }

    /// Structural validation; returns a list of violations (empty = valid).
    ///
    /// Checks counts, weight census, boundary placement, pairwise commutation,
    /// generator independence (binary symplectic rank = d^2 - 1), and logical
    /// operator algebra. Never panics on a corrupted layout.
    pub fn validate_group(&self) -> Vec<String> {
        let mut violations = Vec::new();
        let d = self.distance as usize;

        if self.data_qubits.len() != d * d {
            violations.push(format!(
                "expected {} data qubits, found {}",
                d * d,
                self.data_qubits.len()
            ));
        }
        let n_stab = self.x_stabilizers.len() + self.z_stabilizers.len();
        if n_stab != d * d - 1 {
            violations.push(format!("expected {} stabilizers, found {n_stab}", d * d - 1));
        }
        if self.x_stabilizers.len() != self.z_stabilizers.len() {
            violations.push(format!(
                "kind split not equal: {} X vs {} Z",
                self.x_stabilizers.len(),
                self.z_stabilizers.len()
            ));
        }

        // Weight census and boundary conventions.
        let max = 2 * (self.distance as i32 - 1);
        for stab in self.stabilizers() {
            let w = stab.weight();
            let (cx, cy) = stab.center;
            let interior = cx > 0 && cx < max && cy > 0 && cy < max;
            match (interior, w) {
                (true, 4) | (false, 2) => {}
                _ => violations.push(format!(
                    "stabilizer at {:?} has weight {w}, expected {}",
                    stab.center,
                    if interior { 4 } else { 2 }
                )),
            }
            if !interior {
                let on_tb = cy < 0 || cy > max;
                let expected = if on_tb { StabKind::Z } else { StabKind::X };
                if stab.kind != expected {
                    violations.push(format!(
                        "boundary stabilizer at {:?} is {:?}, expected {:?}",
                        stab.center, stab.kind, expected
                    ));
                }
            }
            for q in stab.support() {
                let (qx, qy) = self.coord(q);
                if (qx - cx).abs() != 1 || (qy - cy).abs() != 1 {
                    violations.push(format!(
                        "stabilizer at {:?} references non-neighbor qubit {q}",
                        stab.center
                    ));
                }
            }
            let mut support: Vec<_> = stab.support().collect();
            support.sort_unstable();
            support.dedup();
            if support.len() != w {
                violations.push(format!("stabilizer at {:?} has duplicate support", stab.center));
            }
        }

        // Pairwise commutation: every X/Z pair must overlap on an even number
        // of qubits (same-kind pairs commute identically).
        let strings: Vec<PauliString> =
            self.stabilizers().map(|s| self.stabilizer_string(s)).collect();
        for (a, sa) in strings.iter().enumerate() {
            for sb in strings.iter().skip(a + 1) {
                if sa.anticommutes_with(sb) {
                    violations.push(format!("stabilizers {a} and later one anticommute"));
                }
            }
        }

        // Generator independence: rank of the binary symplectic matrix.
        let rank = symplectic_rank(&strings, self.data_qubits.len());
        if rank != n_stab {
            violations.push(format!("symplectic rank {rank}, expected {n_stab}"));
        }

        // Logical operators: weight d, commute with the group, anticommute mutually.
        if self.logical_z.weight() != d {
            violations.push(format!("logical Z weight {} != {d}", self.logical_z.weight()));
        }
        if self.logical_x.weight() != d {
            violations.push(format!("logical X weight {} != {d}", self.logical_x.weight()));
        }
        for (i, s) in strings.iter().enumerate() {
            if self.logical_z.anticommutes_with(s) {
                violations.push(format!("logical Z anticommutes with stabilizer {i}"));
            }
            if self.logical_x.anticommutes_with(s) {
                violations.push(format!("logical X anticommutes with stabilizer {i}"));
            }
        }
        if !self.logical_z.anticommutes_with(&self.logical_x) {
            violations.push("logical Z and logical X commute; they must anticommute".into());
        }

        violations
    }

    /// Structured text dump: one line per qubit and per stabilizer, plus the
    /// logical operator supports. Stable across runs for golden-file tests.
    pub fn dump_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "LAYOUT distance={} qubits={} data={} stabilizers={}",
            self.distance,
            self.n_qubits(),
            self.data_qubits.len(),
            self.x_stabilizers.len() + self.z_stabilizers.len()
        )
        .unwrap();
        for (q, (x, y)) in self.data_qubits.iter().enumerate() {
            writeln!(out, "DATA {q} ({x},{y})").unwrap();
        }
        for stab in self.stabilizers() {
            let kind = match stab.kind {
                StabKind::X => "X",
                StabKind::Z => "Z",
            };
            let slots: Vec<String> = stab
                .slots
                .iter()
                .map(|s| s.map_or("-".to_string(), |q| q.to_string()))
                .collect();
            writeln!(
                out,
                "STAB {kind} {} ({},{}) [{}]",
                stab.ancilla,
                stab.center.0,
                stab.center.1,
                slots.join(",")
            )
            .unwrap();
        }
        let fmt_logical = |s: &PauliString| {
            s.0.keys().map(|q| q.to_string()).collect::<Vec<_>>().join(" ")
        };
        writeln!(out, "LOGICAL_Z {}", fmt_logical(&self.logical_z)).unwrap();
        writeln!(out, "LOGICAL_X {}", fmt_logical(&self.logical_x)).unwrap();
        out
    }
}

/// Rank over GF(2) of the stabilizer strings as (x-part | z-part) bit rows.
fn symplectic_rank(strings: &[PauliString], n_data: usize) -> usize {
    let words = (2 * n_data).div_ceil(64);
    let mut rows: Vec<Vec<u64>> = strings
        .iter()
        .map(|s| {
            let mut row = vec![0u64; words];
            for (&q, &p) in &s.0 {
                let q = q as usize;
                if matches!(p, Pauli::X | Pauli::Y) {
                    row[q / 64] |= 1 << (q % 64);
                }
                if matches!(p, Pauli::Z | Pauli::Y) {
                    let b = n_data + q;
                    row[b / 64] |= 1 << (b % 64);
                }
            }
            row
        })
        .collect();

    let mut rank = 0;
    for col in 0..2 * n_data {
        let (w, b) = (col / 64, col % 64);
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] >> b & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] >> b & 1 == 1 {
                for (dst, src) in row.iter_mut().zip(&pivot_row) {
                    *dst ^= src;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}
