use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use crate::ir::{Gate, Opcode};

use super::SimError;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

type Mat2 = [[Complex64; 2]; 2];

/// Dense state vector of `2^n` amplitudes.
///
/// Basis index bit `q` holds qubit `q`, so qubit 0 is the least significant
/// bit: amplitude `i` belongs to `|b_{n-1} ... b_1 b_0>` with `i = sum b_q 2^q`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl QuantumState {
    /// `|0...0>` on `num_qubits` qubits.
    pub fn new(num_qubits: usize) -> Self {
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[0] = ONE;
        QuantumState { num_qubits, amps }
    }

    /// Computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[index] = ONE;
        QuantumState { num_qubits, amps }
    }

    /// Wrap raw amplitudes; the length must be a power of two and the
    /// vector normalized to within 1e-9.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, SimError> {
        if !amps.len().is_power_of_two() {
            return Err(SimError::BadStateLength(amps.len()));
        }
        let state = QuantumState {
            num_qubits: amps.len().trailing_zeros() as usize,
            amps,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(SimError::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Haar-ish random state: i.i.d. Gaussian amplitudes, normalized.
    pub fn random<R: Rng>(num_qubits: usize, rng: &mut R) -> Self {
        let mut amps: Vec<Complex64> = (0..1usize << num_qubits)
            .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        QuantumState { num_qubits, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Probability that measuring `qubit` yields 1.
    pub fn prob_one(&self, qubit: usize) -> f64 {
        let mask = 1usize << qubit;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Largest elementwise distance to another state of the same size.
    pub fn max_abs_diff(&self, other: &QuantumState) -> f64 {
        assert_eq!(self.amps.len(), other.amps.len());
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Relabel qubits: qubit `q` of `self` becomes qubit `map[q]` of the
    /// result, which has `target_qubits` qubits. Amplitudes on basis states
    /// where a qubit outside `map`'s image would have to be 1 are dropped,
    /// which is exact when those qubits are known to be `|0>`.
    pub fn relabeled(&self, map: &[usize], target_qubits: usize) -> QuantumState {
        assert_eq!(map.len(), self.num_qubits);
        let mut amps = vec![ZERO; 1 << target_qubits];
        for (i, a) in self.amps.iter().enumerate() {
            let mut j = 0usize;
            for (q, &p) in map.iter().enumerate() {
                if i >> q & 1 == 1 {
                    j |= 1 << p;
                }
            }
            amps[j] = *a;
        }
        QuantumState {
            num_qubits: target_qubits,
            amps,
        }
    }

    /// Inverse of [`relabeled`](Self::relabeled): read qubit `map[q]` of
    /// `self` as qubit `q` of a smaller state. Amplitudes on basis states
    /// with non-zero spectator qubits are discarded.
    pub fn restricted(&self, map: &[usize]) -> QuantumState {
        let mut amps = vec![ZERO; 1 << map.len()];
        let image: usize = map.iter().map(|&p| 1usize << p).sum();
        for (j, a) in self.amps.iter().enumerate() {
            if j & !image != 0 {
                continue;
            }
            let mut i = 0usize;
            for (q, &p) in map.iter().enumerate() {
                if j >> p & 1 == 1 {
                    i |= 1 << q;
                }
            }
            amps[i] = *a;
        }
        QuantumState {
            num_qubits: map.len(),
            amps,
        }
    }

    fn apply_mat2(&mut self, q: usize, m: &Mat2) {
        let mask = 1usize << q;
        let len = self.amps.len();
        let mut base = 0;
        while base < len {
            for i in base..base + mask {
                let a0 = self.amps[i];
                let a1 = self.amps[i | mask];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | mask] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += mask << 1;
        }
    }

    fn apply_phase(&mut self, q: usize, phase: Complex64) {
        let mask = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask != 0 {
                *a *= phase;
            }
        }
    }

    fn pauli_x(&mut self, q: usize) {
        let mask = 1usize << q;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                self.amps.swap(i, i | mask);
            }
        }
    }

    fn pauli_y(&mut self, q: usize) {
        self.apply_mat2(q, &[[ZERO, -I], [I, ZERO]]);
    }

    fn pauli_z(&mut self, q: usize) {
        self.apply_phase(q, -ONE);
    }

    /// Apply a unitary gate. Fails on `prep_z` and `measure_z`.
    pub fn apply_unitary(&mut self, gate: &Gate) -> Result<(), SimError> {
        let qs = gate.qubits();
        let q = qs[0];
        match gate.opcode() {
            Opcode::X => self.pauli_x(q),
            Opcode::Y => self.pauli_y(q),
            Opcode::Z => self.pauli_z(q),
            Opcode::H => {
                let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
                self.apply_mat2(q, &[[h, h], [h, -h]]);
            }
            Opcode::S => self.apply_phase(q, I),
            Opcode::Sdag => self.apply_phase(q, -I),
            Opcode::T => self.apply_phase(q, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
            Opcode::Tdag => self.apply_phase(q, Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)),
            Opcode::Rx | Opcode::Ry | Opcode::Rz => {
                let theta = gate.angle().unwrap_or_default();
                let (s, c) = (theta / 2.0).sin_cos();
                let m = match gate.opcode() {
                    Opcode::Rx => [
                        [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                        [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
                    ],
                    Opcode::Ry => [
                        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                    ],
                    _ => [
                        [Complex64::new(c, -s), ZERO],
                        [ZERO, Complex64::new(c, s)],
                    ],
                };
                self.apply_mat2(q, &m);
            }
            Opcode::Cnot => {
                let (c, t) = (1usize << qs[0], 1usize << qs[1]);
                for i in 0..self.amps.len() {
                    if i & c != 0 && i & t == 0 {
                        self.amps.swap(i, i | t);
                    }
                }
            }
            Opcode::Cz => {
                let both = (1usize << qs[0]) | (1usize << qs[1]);
                self.negate_where_all(both);
            }
            Opcode::Swap => {
                let (a, b) = (1usize << qs[0], 1usize << qs[1]);
                for i in 0..self.amps.len() {
                    if i & a != 0 && i & b == 0 {
                        self.amps.swap(i, (i & !a) | b);
                    }
                }
            }
            Opcode::Mcz => {
                let all = qs.iter().map(|&q| 1usize << q).sum();
                self.negate_where_all(all);
            }
            op @ (Opcode::PrepZ | Opcode::MeasureZ) => return Err(SimError::NonUnitary(op)),
        }
        Ok(())
    }

    fn negate_where_all(&mut self, mask: usize) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *a = -*a;
            }
        }
    }

    /// Apply any gate. Measurements return the observed bit; `prep_z`
    /// resets the qubit to `|0>` by measuring it and flipping on 1.
    pub fn apply_gate<R: Rng>(&mut self, gate: &Gate, rng: &mut R) -> Option<u8> {
        match gate.opcode() {
            Opcode::MeasureZ => Some(self.measure(gate.qubits()[0], rng, 0.0)),
            Opcode::PrepZ => {
                self.prep_z(gate.qubits()[0], rng);
                None
            }
            _ => {
                self.apply_unitary(gate).expect("unitary opcode");
                None
            }
        }
    }

    /// Reset `qubit` to `|0>`. The state is projected with Born
    /// probabilities and renormalized, then an X restores `|0>` if the
    /// projection landed on `|1>`.
    pub fn prep_z<R: Rng>(&mut self, qubit: usize, rng: &mut R) {
        if self.measure(qubit, rng, 0.0) == 1 {
            self.pauli_x(qubit);
        }
    }

    /// Projective Z measurement. The state collapses onto the true outcome;
    /// the returned bit is flipped with probability `flip_p`.
    pub fn measure<R: Rng>(&mut self, qubit: usize, rng: &mut R, flip_p: f64) -> u8 {
        let p1 = self.prob_one(qubit);
        let outcome = u8::from(rng.gen::<f64>() < p1);
        let mask = 1usize << qubit;
        let keep = if outcome == 1 { mask } else { 0 };
        let p = if outcome == 1 { p1 } else { 1.0 - p1 };
        let scale = 1.0 / p.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == keep {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
        if flip_p > 0.0 && rng.gen::<f64>() < flip_p {
            outcome ^ 1
        } else {
            outcome
        }
    }

    /// Depolarizing channel: each listed qubit independently suffers X, Y
    /// or Z with probability `p/3` each. No randomness is drawn when
    /// `p == 0`, so a zero-error run consumes the same stream as a
    /// perfect one.
    pub fn apply_depolarizing<R: Rng>(&mut self, qubits: &[usize], p: f64, rng: &mut R) {
        if p <= 0.0 {
            return;
        }
        for &q in qubits {
            let u: f64 = rng.gen();
            if u < p / 3.0 {
                self.pauli_x(q);
            } else if u < 2.0 * p / 3.0 {
                self.pauli_y(q);
            } else if u < p {
                self.pauli_z(q);
            }
        }
    }
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; one of the pair is enough here.
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
