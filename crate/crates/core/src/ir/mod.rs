//! Circuit intermediate representation shared by the compiler and the
//! simulator, plus its assembly text format.
//!
//! A [`Circuit`] is an ordered list of [`Bundle`]s. Every gate in a bundle
//! acts on a qubit set disjoint from the other gates in that bundle, so a
//! bundle can be executed in a single step. All constructors validate, so a
//! `Circuit` value always satisfies its invariants.

mod parse;
mod print;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::{parse, SourceError, SourceErrorKind};
pub use print::{bundle_text as print_bundle, print};

/// Gate opcodes understood by the whole stack.
///
/// `Mcz` is a composite multi-controlled Z over any number of qubits. The
/// simulator applies it directly as a diagonal; the compiler expands it into
/// one- and two-qubit gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Opcode {
    PrepZ,
    X,
    Y,
    Z,
    H,
    S,
    Sdag,
    T,
    Tdag,
    Rx,
    Ry,
    Rz,
    Cnot,
    Cz,
    Swap,
    MeasureZ,
    Mcz,
}

impl Opcode {
    pub const ALL: [Opcode; 17] = [
        Opcode::PrepZ,
        Opcode::X,
        Opcode::Y,
        Opcode::Z,
        Opcode::H,
        Opcode::S,
        Opcode::Sdag,
        Opcode::T,
        Opcode::Tdag,
        Opcode::Rx,
        Opcode::Ry,
        Opcode::Rz,
        Opcode::Cnot,
        Opcode::Cz,
        Opcode::Swap,
        Opcode::MeasureZ,
        Opcode::Mcz,
    ];

    /// Canonical lower-case mnemonic.
    pub fn name(self) -> &'static str {
        match self {
            Opcode::PrepZ => "prep_z",
            Opcode::X => "x",
            Opcode::Y => "y",
            Opcode::Z => "z",
            Opcode::H => "h",
            Opcode::S => "s",
            Opcode::Sdag => "sdag",
            Opcode::T => "t",
            Opcode::Tdag => "tdag",
            Opcode::Rx => "rx",
            Opcode::Ry => "ry",
            Opcode::Rz => "rz",
            Opcode::Cnot => "cnot",
            Opcode::Cz => "cz",
            Opcode::Swap => "swap",
            Opcode::MeasureZ => "measure_z",
            Opcode::Mcz => "mcz",
        }
    }

    /// Number of qubit operands, or `None` for the variadic `Mcz`.
    pub fn arity(self) -> Option<usize> {
        match self {
            Opcode::Cnot | Opcode::Cz | Opcode::Swap => Some(2),
            Opcode::Mcz => None,
            _ => Some(1),
        }
    }

    pub fn takes_angle(self) -> bool {
        matches!(self, Opcode::Rx | Opcode::Ry | Opcode::Rz)
    }

    /// True for the two non-unitary operations.
    pub fn is_nonunitary(self) -> bool {
        matches!(self, Opcode::PrepZ | Opcode::MeasureZ)
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown opcode `{0}`")]
pub struct UnknownOpcode(pub String);

impl FromStr for Opcode {
    type Err = UnknownOpcode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let op = match lower.as_str() {
            "measure" => Opcode::MeasureZ,
            "prep" => Opcode::PrepZ,
            "cx" => Opcode::Cnot,
            other => match Opcode::ALL.iter().find(|op| op.name() == other) {
                Some(op) => *op,
                None => return Err(UnknownOpcode(s.to_string())),
            },
        };
        Ok(op)
    }
}

/// Violations of the IR invariants.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IrError {
    #[error("{opcode} expects {expected} qubit operand(s), got {got}")]
    BadArity {
        opcode: Opcode,
        expected: String,
        got: usize,
    },
    #[error("{opcode} {}", if *.expects { "requires an angle" } else { "takes no angle" })]
    BadAngle { opcode: Opcode, expects: bool },
    #[error("angle must be finite")]
    NonFiniteAngle,
    #[error("qubit {qubit} repeated within one gate")]
    RepeatedQubit { qubit: usize },
    #[error("qubit {qubit} out of range for {num_qubits} qubit(s)")]
    IndexOutOfRange { qubit: usize, num_qubits: usize },
    #[error("qubit {qubit} used by more than one gate in a bundle")]
    DuplicateQubitInBundle { qubit: usize },
    #[error("bundle must contain at least one gate")]
    EmptyBundle,
    #[error("a circuit needs at least one qubit")]
    NoQubits,
}

/// One gate application.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    opcode: Opcode,
    qubits: Vec<usize>,
    angle: Option<f64>,
}

impl Gate {
    pub fn new(opcode: Opcode, qubits: Vec<usize>, angle: Option<f64>) -> Result<Self, IrError> {
        match opcode.arity() {
            Some(k) if k != qubits.len() => {
                return Err(IrError::BadArity {
                    opcode,
                    expected: k.to_string(),
                    got: qubits.len(),
                })
            }
            None if qubits.is_empty() => {
                return Err(IrError::BadArity {
                    opcode,
                    expected: "at least 1".into(),
                    got: 0,
                })
            }
            _ => {}
        }
        if opcode.takes_angle() != angle.is_some() {
            return Err(IrError::BadAngle {
                opcode,
                expects: opcode.takes_angle(),
            });
        }
        if angle.is_some_and(|a| !a.is_finite()) {
            return Err(IrError::NonFiniteAngle);
        }
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].contains(q) {
                return Err(IrError::RepeatedQubit { qubit: *q });
            }
        }
        Ok(Gate {
            opcode,
            qubits,
            angle,
        })
    }

    fn fixed(opcode: Opcode, qubits: Vec<usize>, angle: Option<f64>) -> Self {
        Gate::new(opcode, qubits, angle).expect("invalid gate")
    }

    pub fn single(opcode: Opcode, q: usize) -> Self {
        Gate::fixed(opcode, vec![q], None)
    }

    pub fn rotation(opcode: Opcode, q: usize, angle: f64) -> Self {
        Gate::fixed(opcode, vec![q], Some(angle))
    }

    /// Panics if `a == b`.
    pub fn two(opcode: Opcode, a: usize, b: usize) -> Self {
        Gate::fixed(opcode, vec![a, b], None)
    }

    pub fn h(q: usize) -> Self {
        Gate::single(Opcode::H, q)
    }

    pub fn x(q: usize) -> Self {
        Gate::single(Opcode::X, q)
    }

    pub fn rz(q: usize, angle: f64) -> Self {
        Gate::rotation(Opcode::Rz, q, angle)
    }

    pub fn rx(q: usize, angle: f64) -> Self {
        Gate::rotation(Opcode::Rx, q, angle)
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::two(Opcode::Cnot, control, target)
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Gate::two(Opcode::Swap, a, b)
    }

    pub fn measure(q: usize) -> Self {
        Gate::single(Opcode::MeasureZ, q)
    }

    /// Multi-controlled Z over `qubits`; panics on an empty or repeating list.
    pub fn mcz(qubits: Vec<usize>) -> Self {
        Gate::fixed(Opcode::Mcz, qubits, None)
    }

    pub fn opcode(&self) -> Opcode {
        self.opcode
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn angle(&self) -> Option<f64> {
        self.angle
    }

    /// The adjoint gate, or `None` for non-unitary operations.
    pub fn inverse(&self) -> Option<Gate> {
        let opcode = match self.opcode {
            Opcode::PrepZ | Opcode::MeasureZ => return None,
            Opcode::S => Opcode::Sdag,
            Opcode::Sdag => Opcode::S,
            Opcode::T => Opcode::Tdag,
            Opcode::Tdag => Opcode::T,
            op => op,
        };
        Some(Gate {
            opcode,
            qubits: self.qubits.clone(),
            angle: self.angle.map(|a| -a),
        })
    }

    /// Same gate with every qubit index passed through `f`.
    pub fn remapped(&self, f: impl Fn(usize) -> usize) -> Result<Gate, IrError> {
        Gate::new(
            self.opcode,
            self.qubits.iter().map(|&q| f(q)).collect(),
            self.angle,
        )
    }
}

/// Gates that start together and touch pairwise disjoint qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    gates: Vec<Gate>,
}

impl Bundle {
    pub fn new(gates: Vec<Gate>) -> Result<Self, IrError> {
        if gates.is_empty() {
            return Err(IrError::EmptyBundle);
        }
        let mut seen = Vec::new();
        for gate in &gates {
            for &q in gate.qubits() {
                if seen.contains(&q) {
                    return Err(IrError::DuplicateQubitInBundle { qubit: q });
                }
                seen.push(q);
            }
        }
        Ok(Bundle { gates })
    }

    pub fn single(gate: Gate) -> Self {
        Bundle { gates: vec![gate] }
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    fn max_qubit(&self) -> Option<usize> {
        self.gates
            .iter()
            .flat_map(|g| g.qubits().iter().copied())
            .max()
    }
}

pub const DEFAULT_VERSION: &str = "1.0";

/// A validated program over `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    version: String,
    num_qubits: usize,
    bundles: Vec<Bundle>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Result<Self, IrError> {
        Circuit::with_version(DEFAULT_VERSION, num_qubits)
    }

    pub fn with_version(version: &str, num_qubits: usize) -> Result<Self, IrError> {
        if num_qubits == 0 {
            return Err(IrError::NoQubits);
        }
        Ok(Circuit {
            version: version.to_string(),
            num_qubits,
            bundles: Vec::new(),
        })
    }

    /// Build a circuit from gates, one singleton bundle each.
    pub fn from_gates(
        num_qubits: usize,
        gates: impl IntoIterator<Item = Gate>,
    ) -> Result<Self, IrError> {
        let mut circuit = Circuit::new(num_qubits)?;
        for g in gates {
            circuit.push_gate(g)?;
        }
        Ok(circuit)
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }

    pub fn push_bundle(&mut self, bundle: Bundle) -> Result<(), IrError> {
        if let Some(q) = bundle.max_qubit() {
            if q >= self.num_qubits {
                return Err(IrError::IndexOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        self.bundles.push(bundle);
        Ok(())
    }

    pub fn push_gate(&mut self, gate: Gate) -> Result<(), IrError> {
        self.push_bundle(Bundle::single(gate))
    }

    /// Every gate in program order.
    pub fn gates(&self) -> impl Iterator<Item = &Gate> + '_ {
        self.bundles.iter().flat_map(|b| b.gates.iter())
    }

    pub fn gate_count(&self) -> usize {
        self.bundles.iter().map(|b| b.gates.len()).sum()
    }

    /// Append every bundle of `other`; qubit counts must agree.
    pub fn extend(&mut self, other: &Circuit) -> Result<(), IrError> {
        for b in other.bundles() {
            self.push_bundle(b.clone())?;
        }
        Ok(())
    }
}
