//! Stabilizer-tableau simulator: the slow, independent oracle.
//!
//! Tracks the full quantum state as 2n destabilizer/stabilizer rows plus a
//! scratch row, bit-packed per qubit. Measurements branch on whether any
//! stabilizer anticommutes with the observable; Pauli faults act by phase
//! conjugation. The CZ gate is composed as H-CNOT-H so none of its update
//! rules are shared with the frame sampler. Raw outcomes are random, but
//! detector and observable parities are deterministic under Pauli faults,
//! so [`tableau_outcome`] returns parities for comparison against fault
//! injection in the frame sampler.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::circuit::{Circuit, FaultRef, Op};
use crate::error::Result;
use crate::geom::Pauli;

use super::frame::group_faults;

pub(crate) struct Tableau {
    n: usize,
    /// Words per row.
    w: usize,
    /// X bits, rows 0..n destabilizers, n..2n stabilizers, 2n scratch.
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
    rng: ChaCha12Rng,
}

impl Tableau {
    /// All-zeros state: destabilizer i = X_i, stabilizer i = Z_i.
    pub fn new(n: usize, seed: u64) -> Self {
        let w = n.div_ceil(64);
        let mut t = Tableau {
            n,
            w,
            x: vec![0; (2 * n + 1) * w],
            z: vec![0; (2 * n + 1) * w],
            r: vec![false; 2 * n + 1],
            rng: ChaCha12Rng::seed_from_u64(seed),
        };
        for i in 0..n {
            t.x[i * w + i / 64] |= 1 << (i % 64);
            t.z[(n + i) * w + i / 64] |= 1 << (i % 64);
        }
        t
    }

    #[inline]
    fn xb(&self, row: usize, q: usize) -> bool {
        self.x[row * self.w + q / 64] >> (q % 64) & 1 == 1
    }

    #[inline]
    fn zb(&self, row: usize, q: usize) -> bool {
        self.z[row * self.w + q / 64] >> (q % 64) & 1 == 1
    }

    pub fn h(&mut self, q: usize) {
        for row in 0..2 * self.n {
            let (x, z) = (self.xb(row, q), self.zb(row, q));
            self.r[row] ^= x & z;
            let idx = row * self.w + q / 64;
            let bit = 1u64 << (q % 64);
            if x != z {
                self.x[idx] ^= bit;
                self.z[idx] ^= bit;
            }
        }
    }

    pub fn cnot(&mut self, a: usize, b: usize) {
        for row in 0..2 * self.n {
            let (xa, za) = (self.xb(row, a), self.zb(row, a));
            let (xb, zb) = (self.xb(row, b), self.zb(row, b));
            self.r[row] ^= xa & zb & !(xb ^ za);
            if xa {
                self.x[row * self.w + b / 64] ^= 1 << (b % 64);
            }
            if zb {
                self.z[row * self.w + a / 64] ^= 1 << (a % 64);
            }
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cnot(a, b);
        self.h(b);
    }

    /// Conjugate the state by a Pauli: phases flip on anticommuting rows.
    pub fn apply_pauli(&mut self, q: usize, p: Pauli) {
        for row in 0..2 * self.n {
            let flip = match p {
                Pauli::X => self.zb(row, q),
                Pauli::Z => self.xb(row, q),
                Pauli::Y => self.xb(row, q) ^ self.zb(row, q),
            };
            self.r[row] ^= flip;
        }
    }

    /// Phase exponent of multiplying single-qubit Paulis (x1,z1)*(x2,z2).
    fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
        match (x1, z1) {
            (false, false) => 0,
            (true, true) => z2 as i32 - x2 as i32,
            (true, false) => z2 as i32 * (2 * x2 as i32 - 1),
            (false, true) => x2 as i32 * (1 - 2 * z2 as i32),
        }
    }

    /// Row h := row i * row h, with exact phase arithmetic.
    fn rowsum(&mut self, h: usize, i: usize) {
        let mut exp = 2 * self.r[h] as i32 + 2 * self.r[i] as i32;
        for q in 0..self.n {
            exp += Self::g(self.xb(i, q), self.zb(i, q), self.xb(h, q), self.zb(h, q));
        }
        debug_assert_eq!(exp.rem_euclid(4) % 2, 0);
        self.r[h] = exp.rem_euclid(4) == 2;
        for w in 0..self.w {
            self.x[h * self.w + w] ^= self.x[i * self.w + w];
            self.z[h * self.w + w] ^= self.z[i * self.w + w];
        }
    }

    pub fn measure(&mut self, q: usize) -> bool {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&row| self.xb(row, q)) {
            // Random branch: some stabilizer anticommutes with Z_q.
            for row in 0..2 * n {
                if row != p && self.xb(row, q) {
                    self.rowsum(row, p);
                }
            }
            for w in 0..self.w {
                self.x[(p - n) * self.w + w] = self.x[p * self.w + w];
                self.z[(p - n) * self.w + w] = self.z[p * self.w + w];
                self.x[p * self.w + w] = 0;
                self.z[p * self.w + w] = 0;
            }
            self.r[p - n] = self.r[p];
            self.z[p * self.w + q / 64] |= 1 << (q % 64);
            self.r[p] = self.rng.gen();
            self.r[p]
        } else {
            // Deterministic branch: accumulate the matching stabilizers in
            // the scratch row.
            let scratch = 2 * n;
            for w in 0..self.w {
                self.x[scratch * self.w + w] = 0;
                self.z[scratch * self.w + w] = 0;
            }
            self.r[scratch] = false;
            for i in 0..n {
                if self.xb(i, q) {
                    self.rowsum(scratch, i + n);
                }
            }
            self.r[scratch]
        }
    }

    pub fn reset(&mut self, q: usize) {
        if self.measure(q) {
            self.apply_pauli(q, Pauli::X);
        }
    }
}

/// Run the circuit on the tableau with the given faults forced; returns
/// detector parities and the observable parity.
///
/// Raw measurement outcomes depend on `seed`, the returned parities do not:
/// they are deterministic functions of the fault set.
pub fn tableau_outcome(
    circuit: &Circuit,
    faults: &[FaultRef],
    seed: u64,
) -> Result<(Vec<bool>, bool)> {
    let by_site = group_faults(circuit, faults)?;
    let mut t = Tableau::new(circuit.n_qubits as usize, seed);
    let mut outcomes: Vec<bool> = Vec::with_capacity(circuit.n_records as usize);
    for op in &circuit.ops {
        match *op {
            Op::Reset(q) => t.reset(q as usize),
            Op::H(q) => t.h(q as usize),
            Op::Cz(a, b) => t.cz(a as usize, b as usize),
            Op::Measure(q) => {
                let m = t.measure(q as usize);
                outcomes.push(m);
            }
            Op::Fault(s) => {
                if let Some(comps) = by_site.get(&s) {
                    let site = &circuit.sites[s as usize];
                    let table = circuit.classes[site.class as usize].kind.components();
                    for &c in comps {
                        for (slot, pauli) in table[c as usize].iter().enumerate() {
                            if let Some(p) = pauli {
                                t.apply_pauli(site.qubits[slot] as usize, *p);
                            }
                        }
                    }
                }
            }
            Op::IdleMark(_) | Op::Detector(_) | Op::Tick => {}
        }
    }
    let detectors = circuit
        .detectors
        .iter()
        .map(|d| d.records.iter().fold(false, |acc, &r| acc ^ outcomes[r as usize]))
        .collect();
    let observable = circuit
        .observable
        .iter()
        .fold(false, |acc, &r| acc ^ outcomes[r as usize]);
    Ok((detectors, observable))
}
