//! QUBO and Ising optimization: models, the TSP encoding, exhaustive and
//! annealing solvers, and a QAOA loop that samples from the simulator.

mod anneal;
mod qaoa;
mod qubo;
mod tsp;

use thiserror::Error;

use crate::simulator::SimError;

pub use anneal::{anneal, AnnealReport, AnnealSchedule};
pub use qaoa::{
    qaoa_build, qaoa_expectation, qaoa_gate_count, qaoa_optimize, spins_from_key, QaoaOptions,
    QaoaParams, QaoaReport,
};
pub use qubo::{
    bits_from_spins, brute_force, qubo_to_ising, spins_from_bits, Assignment, IsingModel,
    QuboModel, BRUTE_FORCE_MAX_VARS,
};
pub use tsp::{default_penalty, encode_tsp, TspDecoder, TspInstance, EXACT_TOUR_MAX_CITIES};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptError {
    #[error("expected {expected} variables, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("index {index} out of range for {n} variables")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("penalty weight must be positive, got {0}")]
    BadPenalty(f64),
    #[error("problem size {n} exceeds the exhaustive-search cap of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("{n} spins exceed the simulator cap of {max} qubits")]
    TooManyQubits { n: usize, max: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid QAOA parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}
