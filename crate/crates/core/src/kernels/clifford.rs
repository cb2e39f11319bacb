//! The single-qubit Clifford group as 24 gate words with a composition table.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::ir::{Gate, Opcode};
use crate::simulator::QuantumState;

pub const GROUP_ORDER: usize = 24;

const GENERATORS: [Opcode; 6] = [Opcode::H, Opcode::S, Opcode::Sdag, Opcode::X, Opcode::Y, Opcode::Z];

type Matrix = [[Complex64; 2]; 2];

#[derive(Debug, Clone)]
pub struct CliffordElement {
    /// Shortest word over H, S, SDAG, X, Y, Z; applied left to right.
    pub gates: Vec<Opcode>,
    matrix: Matrix,
}

impl CliffordElement {
    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn circuit_gates(&self, qubit: usize) -> impl Iterator<Item = Gate> + '_ {
        self.gates.iter().map(move |&op| Gate::single(op, qubit))
    }
}

#[derive(Debug)]
pub struct CliffordTable {
    elements: Vec<CliffordElement>,
    /// `compose[a][b]`: apply `a`, then `b`.
    compose: Vec<[u8; GROUP_ORDER]>,
    inverse: [u8; GROUP_ORDER],
}

fn gate_matrix(op: Opcode) -> Matrix {
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for col in 0..2 {
        let mut s = QuantumState::basis(1, col);
        s.apply_unitary(&Gate::single(op, 0)).expect("unitary generator");
        for (row, amp) in m.iter_mut().zip(s.amplitudes()) {
            row[col] = *amp;
        }
    }
    m
}

fn mul(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Equal up to a global phase.
fn same_up_to_phase(a: &Matrix, b: &Matrix) -> bool {
    // <a, b> has modulus 2 exactly when b = e^{i phi} a.
    let inner: Complex64 = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| a[i][j].conj() * b[i][j])
        .sum();
    (inner.norm() - 2.0).abs() < 1e-9
}

impl CliffordTable {
    fn build() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mut elements = vec![CliffordElement {
            gates: Vec::new(),
            matrix: [[one, zero], [zero, one]],
        }];
        let generators: Vec<(Opcode, Matrix)> = GENERATORS.iter().map(|&op| (op, gate_matrix(op))).collect();
        let mut frontier = 0;
        while frontier < elements.len() {
            for (op, g) in &generators {
                let m = mul(g, &elements[frontier].matrix);
                if !elements.iter().any(|e| same_up_to_phase(&e.matrix, &m)) {
                    let mut gates = elements[frontier].gates.clone();
                    gates.push(*op);
                    elements.push(CliffordElement { gates, matrix: m });
                }
            }
            frontier += 1;
        }
        assert_eq!(elements.len(), GROUP_ORDER);

        let find = |m: &Matrix| elements.iter().position(|e| same_up_to_phase(&e.matrix, m)).expect("closed group") as u8;
        let compose: Vec<[u8; GROUP_ORDER]> = (0..GROUP_ORDER)
            .map(|a| {
                let mut row = [0u8; GROUP_ORDER];
                for (b, cell) in row.iter_mut().enumerate() {
                    *cell = find(&mul(&elements[b].matrix, &elements[a].matrix));
                }
                row
            })
            .collect();
        let mut inverse = [0u8; GROUP_ORDER];
        for (a, inv) in inverse.iter_mut().enumerate() {
            *inv = compose[a].iter().position(|&c| c == 0).expect("group inverse") as u8;
        }
        CliffordTable {
            elements,
            compose,
            inverse,
        }
    }

    pub fn get() -> &'static CliffordTable {
        static TABLE: OnceLock<CliffordTable> = OnceLock::new();
        TABLE.get_or_init(CliffordTable::build)
    }

    pub fn element(&self, index: usize) -> &CliffordElement {
        &self.elements[index]
    }

    pub fn elements(&self) -> &[CliffordElement] {
        &self.elements
    }

    pub fn compose(&self, first: usize, then: usize) -> usize {
        self.compose[first][then] as usize
    }

    pub fn inverse(&self, index: usize) -> usize {
        self.inverse[index] as usize
    }

    /// Element undoing the whole sequence.
    pub fn recovery(&self, sequence: &[usize]) -> usize {
        let total = sequence.iter().fold(0, |acc, &c| self.compose(acc, c));
        self.inverse(total)
    }

    pub fn mean_gate_count(&self) -> f64 {
        self.elements.iter().map(|e| e.gate_count() as f64).sum::<f64>() / GROUP_ORDER as f64
    }
}
