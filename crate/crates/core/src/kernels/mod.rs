//! Application kernels: Grover read alignment and randomized benchmarking.

pub mod clifford;
pub mod grover;
pub mod rb;

use thiserror::Error;

use crate::compiler::CompileError;
use crate::simulator::SimError;

pub use clifford::{CliffordElement, CliffordTable};
pub use grover::{
    diffusion, grover_align, grover_build, marked_indices, optimal_iterations, phase_oracle, random_dna,
    success_probability, AlignOptions, AlignmentHit, AlignmentQuery, AlignmentResult, Iterations, ReferenceIndex,
};
pub use rb::{fit_decay, predicted_error_per_clifford, rb_circuit, rb_sequence, run_rb, LengthPoint, RbConfig, RbResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("index size {0} is not a power of two (at least 2)")]
    NotPowerOfTwo(usize),
    #[error("no reference slice matches the read; exact iteration count is undefined")]
    NoMatchKnown,
    #[error("marked index {index} outside an index of size {size}")]
    MarkedOutOfRange { index: usize, size: usize },
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error("invalid benchmarking config: {0}")]
    InvalidConfig(String),
    #[error("fit failed: {0}")]
    FitFailed(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Compile(#[from] CompileError),
}
