//! State-vector execution backend.
//!
//! Circuits run bundle by bundle from `|0...0>`, once per shot. Shot `s`
//! draws from its own generator seeded with `seed ^ s`, so shots are
//! independent and a run is a pure function of `(circuit, noise, shots,
//! seed)`.
//!
//! Noise is simulated by sampling trajectories: after every unitary gate
//! each touched qubit goes through a depolarizing channel, and measurements
//! (and preparations) are flipped with a separate probability.

mod state;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{Circuit, Gate, Opcode};

pub use state::QuantumState;

/// Default qubit cap for [`run`].
pub const DEFAULT_MAX_QUBITS: usize = 25;

/// Environment variable overriding the qubit cap in [`RunOptions::from_env`].
pub const MAX_QUBITS_ENV: &str = "QSTACK_MAX_QUBITS";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("circuit needs {requested} qubits, simulator cap is {max}")]
    TooManyQubits { requested: usize, max: usize },
    #[error("{0} is not unitary")]
    NonUnitary(Opcode),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("bad noise spec `{0}`; expected `perfect` or `depolarizing:<p>[:flip=<q>]`")]
    BadNoiseSpec(String),
    #[error("state length {0} is not a power of two")]
    BadStateLength(usize),
    #[error("state has squared norm {0}, expected 1")]
    NotNormalized(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NoiseKind {
    Perfect,
    Depolarizing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    kind: NoiseKind,
    gate_error_p: f64,
    measurement_flip_p: f64,
}

fn check_probability(p: f64) -> Result<f64, SimError> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(SimError::InvalidProbability(p))
    }
}

impl NoiseModel {
    pub fn perfect() -> Self {
        NoiseModel {
            kind: NoiseKind::Perfect,
            gate_error_p: 0.0,
            measurement_flip_p: 0.0,
        }
    }

    pub fn depolarizing(gate_error_p: f64, measurement_flip_p: f64) -> Result<Self, SimError> {
        Ok(NoiseModel {
            kind: NoiseKind::Depolarizing,
            gate_error_p: check_probability(gate_error_p)?,
            measurement_flip_p: check_probability(measurement_flip_p)?,
        })
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn gate_error_p(&self) -> f64 {
        match self.kind {
            NoiseKind::Perfect => 0.0,
            NoiseKind::Depolarizing => self.gate_error_p,
        }
    }

    pub fn measurement_flip_p(&self) -> f64 {
        match self.kind {
            NoiseKind::Perfect => 0.0,
            NoiseKind::Depolarizing => self.measurement_flip_p,
        }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::perfect()
    }
}

impl FromStr for NoiseModel {
    type Err = SimError;

    /// `perfect`, `depolarizing:<p>` or `depolarizing:<p>:flip=<q>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SimError::BadNoiseSpec(s.to_string());
        let mut parts = s.trim().split(':');
        match parts.next().map(str::to_ascii_lowercase).as_deref() {
            Some("perfect") if parts.next().is_none() => Ok(NoiseModel::perfect()),
            Some("depolarizing") => {
                let p: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
                let flip = match parts.next() {
                    None => 0.0,
                    Some(f) => f
                        .trim()
                        .strip_prefix("flip=")
                        .ok_or_else(bad)?
                        .parse()
                        .map_err(|_| bad())?,
                };
                if parts.next().is_some() {
                    return Err(bad());
                }
                NoiseModel::depolarizing(p, flip)
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NoiseKind::Perfect => f.write_str("perfect"),
            NoiseKind::Depolarizing if self.measurement_flip_p > 0.0 => write!(
                f,
                "depolarizing:{}:flip={}",
                self.gate_error_p, self.measurement_flip_p
            ),
            NoiseKind::Depolarizing => write!(f, "depolarizing:{}", self.gate_error_p),
        }
    }
}

/// Outcome of a single shot: the last reported bit of every measured qubit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotResult {
    bits: Vec<Option<u8>>,
}

impl ShotResult {
    fn new(num_qubits: usize) -> Self {
        ShotResult {
            bits: vec![None; num_qubits],
        }
    }

    pub fn bit(&self, qubit: usize) -> Option<u8> {
        self.bits[qubit]
    }

    pub fn measured(&self, qubit: usize) -> bool {
        self.bits[qubit].is_some()
    }

    /// Measured bits, highest qubit first; unmeasured qubits are omitted.
    pub fn bitstring(&self) -> String {
        self.bits
            .iter()
            .rev()
            .flatten()
            .map(|&b| if b == 1 { '1' } else { '0' })
            .collect()
    }
}

/// Aggregated shots. Histogram keys are [`ShotResult::bitstring`]s.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub shots: u64,
    pub seed: u64,
    pub histogram: BTreeMap<String, u64>,
}

impl RunSummary {
    pub fn frequency(&self, key: &str) -> f64 {
        if self.shots == 0 {
            return 0.0;
        }
        self.histogram.get(key).copied().unwrap_or(0) as f64 / self.shots as f64
    }

    /// Merge another summary's counts; order of merges does not matter.
    pub fn merge(&mut self, other: &RunSummary) {
        self.shots += other.shots;
        for (k, v) in &other.histogram {
            *self.histogram.entry(k.clone()).or_insert(0) += v;
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("summary serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub max_qubits: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

impl RunOptions {
    /// Default options with the cap taken from `QSTACK_MAX_QUBITS` if set.
    pub fn from_env() -> Self {
        let max_qubits = std::env::var(MAX_QUBITS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_QUBITS);
        RunOptions { max_qubits }
    }
}

/// Per-shot generator.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ shot)
}

#[inline]
fn check_normalized(_state: &QuantumState) {
    #[cfg(any(debug_assertions, feature = "checked"))]
    {
        let norm = _state.norm_sqr();
        assert!(
            (norm - 1.0).abs() <= 1e-12,
            "state norm drifted to {norm} after a bundle"
        );
    }
}

/// Execute one gate with the noise model applied, recording measurements.
fn execute_gate<R: Rng>(
    state: &mut QuantumState,
    gate: &Gate,
    noise: &NoiseModel,
    rng: &mut R,
    record: &mut ShotResult,
) {
    let flip_p = noise.measurement_flip_p();
    match gate.opcode() {
        Opcode::MeasureZ => {
            let q = gate.qubits()[0];
            record.bits[q] = Some(state.measure(q, rng, flip_p));
        }
        Opcode::PrepZ => {
            let q = gate.qubits()[0];
            state.prep_z(q, rng);
            if flip_p > 0.0 && rng.gen::<f64>() < flip_p {
                state
                    .apply_unitary(&Gate::x(q))
                    .expect("x is unitary");
            }
        }
        _ => {
            state.apply_unitary(gate).expect("unitary opcode");
            state.apply_depolarizing(gate.qubits(), noise.gate_error_p(), rng);
        }
    }
}

/// Flattened program with the pieces that can be shared between shots.
struct Plan<'a> {
    num_qubits: usize,
    /// Bundles run on every shot (after the cached prefix).
    bundles: Vec<Vec<&'a Gate>>,
    /// State after the leading gates that consume no randomness.
    prefix_state: QuantumState,
    /// Trailing block of measurements, sampled jointly.
    tail_measures: Vec<usize>,
}

impl<'a> Plan<'a> {
    fn new(circuit: &'a Circuit, noise: &NoiseModel) -> Plan<'a> {
        let n = circuit.num_qubits();
        let bundles: Vec<Vec<&Gate>> = circuit
            .bundles()
            .iter()
            .map(|b| b.gates().iter().collect())
            .collect();

        // Leading bundles are deterministic when every gate is unitary and
        // no gate noise is drawn.
        let noiseless = noise.gate_error_p() == 0.0;
        let mut prefix_state = QuantumState::new(n);
        let mut split = 0;
        if noiseless {
            for bundle in &bundles {
                if bundle.iter().any(|g| g.opcode().is_nonunitary()) {
                    break;
                }
                for g in bundle {
                    prefix_state.apply_unitary(g).expect("unitary opcode");
                }
                check_normalized(&prefix_state);
                split += 1;
            }
        }
        let mut rest: Vec<Vec<&Gate>> = bundles[split..].to_vec();

        // Trailing bundles made only of measurements.
        let mut tail_len = 0;
        for bundle in rest.iter().rev() {
            if bundle.iter().all(|g| g.opcode() == Opcode::MeasureZ) {
                tail_len += 1;
            } else {
                break;
            }
        }
        let tail_measures = rest
            .split_off(rest.len() - tail_len)
            .into_iter()
            .flatten()
            .map(|g| g.qubits()[0])
            .collect();

        Plan {
            num_qubits: n,
            bundles: rest,
            prefix_state,
            tail_measures,
        }
    }
}

fn cumulative(state: &QuantumState) -> Vec<f64> {
    let mut acc = 0.0;
    state
        .amplitudes()
        .iter()
        .map(|a| {
            acc += a.norm_sqr();
            acc
        })
        .collect()
}

/// Draw a basis index from a cumulative distribution.
fn sample_index<R: Rng>(cdf: &[f64], rng: &mut R) -> usize {
    let total = *cdf.last().expect("non-empty distribution");
    let u = rng.gen::<f64>() * total;
    let mut i = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
    // Rounding can land on a zero-probability entry at the very end.
    while i > 0 && cdf[i] == cdf[i - 1] {
        i -= 1;
    }
    i
}

fn run_shot(
    plan: &Plan<'_>,
    noise: &NoiseModel,
    tail_cdf: Option<&[f64]>,
    rng: &mut ChaCha8Rng,
) -> ShotResult {
    let mut record = ShotResult::new(plan.num_qubits);
    let mut owned: Option<QuantumState> = None;
    if !plan.bundles.is_empty() {
        let mut state = plan.prefix_state.clone();
        for bundle in &plan.bundles {
            for gate in bundle {
                execute_gate(&mut state, gate, noise, rng, &mut record);
            }
            check_normalized(&state);
        }
        owned = Some(state);
    }
    if !plan.tail_measures.is_empty() {
        let local;
        let cdf = match (&owned, tail_cdf) {
            (Some(state), _) => {
                local = cumulative(state);
                &local[..]
            }
            (None, Some(cdf)) => cdf,
            (None, None) => unreachable!("tail cdf is precomputed when nothing runs per shot"),
        };
        let index = sample_index(cdf, rng);
        let flip_p = noise.measurement_flip_p();
        for &q in &plan.tail_measures {
            let mut bit = (index >> q & 1) as u8;
            if flip_p > 0.0 && rng.gen::<f64>() < flip_p {
                bit ^= 1;
            }
            record.bits[q] = Some(bit);
        }
    }
    record
}

/// Run `shots` shots and collect individual results.
pub fn run_shots(
    circuit: &Circuit,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
    options: &RunOptions,
) -> Result<Vec<ShotResult>, SimError> {
    if circuit.num_qubits() > options.max_qubits {
        return Err(SimError::TooManyQubits {
            requested: circuit.num_qubits(),
            max: options.max_qubits,
        });
    }
    let plan = Plan::new(circuit, noise);
    let tail_cdf = (plan.bundles.is_empty() && !plan.tail_measures.is_empty())
        .then(|| cumulative(&plan.prefix_state));
    Ok((0..shots)
        .map(|s| {
            let mut rng = shot_rng(seed, s);
            run_shot(&plan, noise, tail_cdf.as_deref(), &mut rng)
        })
        .collect())
}

/// Run with default options (25-qubit cap).
pub fn run(
    circuit: impl AsRef<Circuit>,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<RunSummary, SimError> {
    run_with(circuit, noise, shots, seed, &RunOptions::default())
}

pub fn run_with(
    circuit: impl AsRef<Circuit>,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
    options: &RunOptions,
) -> Result<RunSummary, SimError> {
    let results = run_shots(circuit.as_ref(), noise, shots, seed, options)?;
    let mut histogram = BTreeMap::new();
    for r in results {
        *histogram.entry(r.bitstring()).or_insert(0) += 1;
    }
    Ok(RunSummary {
        shots,
        seed,
        histogram,
    })
}

/// Final state of a circuit without measurements or preparations.
pub fn statevector(circuit: &Circuit) -> Result<QuantumState, SimError> {
    let mut state = QuantumState::new(circuit.num_qubits());
    for bundle in circuit.bundles() {
        for gate in bundle.gates() {
            state.apply_unitary(gate)?;
        }
        check_normalized(&state);
    }
    Ok(state)
}

/// Run the unitary part of `circuit` on a given input state.
pub fn evolve(circuit: &Circuit, mut state: QuantumState) -> Result<QuantumState, SimError> {
    assert_eq!(state.num_qubits(), circuit.num_qubits());
    for bundle in circuit.bundles() {
        for gate in bundle.gates() {
            state.apply_unitary(gate)?;
        }
        check_normalized(&state);
    }
    Ok(state)
}

impl AsRef<Circuit> for Circuit {
    fn as_ref(&self) -> &Circuit {
        self
    }
}
