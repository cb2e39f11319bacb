use std::fmt::Write;

use super::{Bundle, Circuit, Gate};

pub(super) fn gate_text(gate: &Gate) -> String {
    let mut out = gate.opcode().name().to_string();
    for (i, q) in gate.qubits().iter().enumerate() {
        out.push_str(if i == 0 { " " } else { ", " });
        let _ = write!(out, "q[{q}]");
    }
    if let Some(a) = gate.angle() {
        // `{:?}` on f64 is the shortest string that parses back to the same bits.
        let _ = write!(out, ", {a:?}");
    }
    out
}

/// One bundle as a single instruction line (no newline).
pub fn bundle_text(bundle: &Bundle) -> String {
    match bundle.gates() {
        [g] => gate_text(g),
        gates => {
            let inner: Vec<String> = gates.iter().map(gate_text).collect();
            format!("{{ {} }}", inner.join(" | "))
        }
    }
}

/// Render a circuit in the assembly format, LF line endings.
pub fn print(circuit: &Circuit) -> String {
    let mut out = format!(
        "version {}\nqubits {}\n",
        circuit.version(),
        circuit.num_qubits()
    );
    for bundle in circuit.bundles() {
        out.push_str(&bundle_text(bundle));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Opcode};
    use super::*;

    #[test]
    fn empty_program() {
        assert_eq!(print(&Circuit::new(1).unwrap()), "version 1.0\nqubits 1\n");
    }

    #[test]
    fn bell_normalizes_to_fixed_point() {
        let once = print(&parse("version 1.0\nqubits 2\nh q[0]\ncnot q[0], q[1]\nmeasure q[0]").unwrap());
        assert_eq!(once, "version 1.0\nqubits 2\nh q[0]\ncnot q[0], q[1]\nmeasure_z q[0]\n");
        assert_eq!(print(&parse(&once).unwrap()), once);
    }

    #[test]
    fn bundles_and_angles() {
        let mut c = Circuit::new(3).unwrap();
        c.push_bundle(
            Bundle::new(vec![
                Gate::rotation(Opcode::Ry, 0, 0.1),
                Gate::cnot(2, 1),
            ])
            .unwrap(),
        )
        .unwrap();
        let text = print(&c);
        assert_eq!(text, "version 1.0\nqubits 3\n{ ry q[0], 0.1 | cnot q[2], q[1] }\n");
        assert_eq!(parse(&text).unwrap(), c);
    }
}
