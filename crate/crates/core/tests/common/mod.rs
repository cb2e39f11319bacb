#![allow(dead_code)]

use proptest::prelude::*;
use qstack::ir::{Bundle, Circuit, Gate, Opcode};
use qstack::simulator::QuantumState;

const ONE_QUBIT: [Opcode; 8] = [
    Opcode::X,
    Opcode::Y,
    Opcode::Z,
    Opcode::H,
    Opcode::S,
    Opcode::Sdag,
    Opcode::T,
    Opcode::Tdag,
];

fn distinct(n: usize, k: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(move |v| v[..k].to_vec())
}

/// A random unitary gate on `n` qubits; `mcz` appears when `n >= 3`.
pub fn unitary_gate(n: usize) -> BoxedStrategy<Gate> {
    let angle = -7.0f64..7.0;
    let single = (0..ONE_QUBIT.len(), 0..n).prop_map(|(o, q)| Gate::single(ONE_QUBIT[o], q));
    let rot = (0..3usize, 0..n, angle).prop_map(|(o, q, a)| {
        Gate::rotation([Opcode::Rx, Opcode::Ry, Opcode::Rz][o], q, a)
    });
    if n < 2 {
        return prop_oneof![single, rot].boxed();
    }
    let two = (0..3usize, distinct(n, 2))
        .prop_map(|(o, q)| Gate::two([Opcode::Cnot, Opcode::Cz, Opcode::Swap][o], q[0], q[1]));
    if n < 3 {
        return prop_oneof![3 => single, 2 => rot, 3 => two].boxed();
    }
    let mcz = (3..=n.min(4))
        .prop_flat_map(move |k| distinct(n, k))
        .prop_map(Gate::mcz);
    prop_oneof![3 => single, 2 => rot, 3 => two, 1 => mcz].boxed()
}

pub fn unitary_circuit(max_qubits: usize, max_gates: usize) -> impl Strategy<Value = Circuit> {
    (1..=max_qubits).prop_flat_map(move |n| {
        prop::collection::vec(unitary_gate(n), 0..max_gates)
            .prop_map(move |gates| Circuit::from_gates(n, gates).expect("valid gates"))
    })
}

/// Any valid circuit, with parallel bundles and non-unitary gates.
pub fn any_circuit() -> impl Strategy<Value = Circuit> {
    (1..=5usize).prop_flat_map(|n| {
        let gate = prop_oneof![
            6 => unitary_gate(n),
            1 => (0..n).prop_map(|q| Gate::single(Opcode::PrepZ, q)),
            1 => (0..n).prop_map(Gate::measure),
        ];
        prop::collection::vec(prop::collection::vec(gate, 1..4), 0..12).prop_map(move |groups| {
            let mut c = Circuit::new(n).unwrap();
            for group in groups {
                let mut used = vec![false; n];
                let mut kept = Vec::new();
                for g in group {
                    if g.qubits().iter().all(|&q| !used[q]) {
                        g.qubits().iter().for_each(|&q| used[q] = true);
                        kept.push(g);
                    }
                }
                c.push_bundle(Bundle::new(kept).unwrap()).unwrap();
            }
            c
        })
    })
}

/// `max |a - e^{i phi} b|` for the best global phase `phi`.
pub fn phase_insensitive_diff(a: &QuantumState, b: &QuantumState) -> f64 {
    let overlap: num_complex::Complex64 = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| y.conj() * x)
        .sum();
    let phase = if overlap.norm() > 1e-12 {
        overlap / overlap.norm()
    } else {
        num_complex::Complex64::new(1.0, 0.0)
    };
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y * phase).norm())
        .fold(0.0, f64::max)
}
