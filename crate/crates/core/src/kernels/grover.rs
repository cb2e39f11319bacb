//! Grover search over an indexed reference for approximate read alignment.
//!
//! The reference is cut into equal-width slices. A read marks every slice
//! within a Hamming tolerance; the marking set becomes a phase oracle, and
//! Grover iterations amplify the marked indices before measurement.

use std::f64::consts::PI;

use serde::Serialize;

use crate::compiler::{self, CompileOptions, Topology};
use crate::ir::{Bundle, Circuit, Gate};
use crate::simulator::{self, NoiseModel, RunOptions, RunSummary};

use super::KernelError;

/// Reference cut into `slice_width`-long entries, padded to a power of two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceIndex {
    slice_width: usize,
    slices: Vec<Option<String>>,
}

fn normalize_dna(text: &str, what: &str) -> Result<String, KernelError> {
    let upper: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_uppercase();
    if let Some(bad) = upper.chars().find(|c| !matches!(c, 'A' | 'C' | 'G' | 'T')) {
        return Err(KernelError::InvalidSequence(format!("{what} contains `{bad}`; alphabet is A, C, G, T")));
    }
    Ok(upper)
}

impl ReferenceIndex {
    /// Slice `reference` into consecutive non-overlapping windows of
    /// `slice_width` bases, dropping a trailing partial window, and pad
    /// with never-matching entries up to a power of two (at least 2).
    /// Whitespace is ignored and lower-case bases are accepted.
    pub fn new(reference: &str, slice_width: usize) -> Result<Self, KernelError> {
        if slice_width == 0 {
            return Err(KernelError::InvalidSequence("slice width must be positive".into()));
        }
        let reference = normalize_dna(reference, "reference")?;
        let mut slices: Vec<Option<String>> = reference
            .as_bytes()
            .chunks_exact(slice_width)
            .map(|c| Some(String::from_utf8(c.to_vec()).expect("ascii")))
            .collect();
        if slices.is_empty() {
            return Err(KernelError::InvalidSequence(format!(
                "reference shorter than one slice of {slice_width} bases"
            )));
        }
        let padded = slices.len().next_power_of_two().max(2);
        slices.resize(padded, None);
        Ok(ReferenceIndex { slice_width, slices })
    }

    /// Use prepared entries as-is; `None` entries are padding.
    pub fn from_entries(entries: Vec<Option<String>>, slice_width: usize) -> Result<Self, KernelError> {
        if entries.len() < 2 || !entries.len().is_power_of_two() {
            return Err(KernelError::NotPowerOfTwo(entries.len()));
        }
        let mut slices = Vec::with_capacity(entries.len());
        for e in entries {
            slices.push(match e {
                Some(s) => {
                    let s = normalize_dna(&s, "slice")?;
                    if s.len() != slice_width {
                        return Err(KernelError::InvalidSequence(format!(
                            "slice `{s}` is not {slice_width} bases long"
                        )));
                    }
                    Some(s)
                }
                None => None,
            });
        }
        Ok(ReferenceIndex { slice_width, slices })
    }

    pub fn slice_width(&self) -> usize {
        self.slice_width
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn slice(&self, index: usize) -> Option<&str> {
        self.slices[index].as_deref()
    }

    /// Qubits needed to address every entry.
    pub fn index_qubits(&self) -> usize {
        self.slices.len().trailing_zeros() as usize
    }
}

/// A read to align and its mismatch tolerance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentQuery {
    read: String,
    max_mismatch: usize,
}

impl AlignmentQuery {
    pub fn new(read: &str, max_mismatch: usize) -> Result<Self, KernelError> {
        let read = normalize_dna(read, "read")?;
        if read.is_empty() {
            return Err(KernelError::InvalidSequence("empty read".into()));
        }
        Ok(AlignmentQuery { read, max_mismatch })
    }

    pub fn read(&self) -> &str {
        &self.read
    }

    pub fn max_mismatch(&self) -> usize {
        self.max_mismatch
    }
}

fn hamming(a: &str, b: &str) -> usize {
    a.bytes().zip(b.bytes()).filter(|(x, y)| x != y).count()
}

/// Indices whose slice is within the query's mismatch tolerance.
pub fn marked_indices(index: &ReferenceIndex, query: &AlignmentQuery) -> Result<Vec<usize>, KernelError> {
    if query.read.len() != index.slice_width {
        return Err(KernelError::InvalidSequence(format!(
            "read has {} bases, slices have {}",
            query.read.len(),
            index.slice_width
        )));
    }
    Ok((0..index.len())
        .filter(|&i| index.slice(i).is_some_and(|s| hamming(s, &query.read) <= query.max_mismatch))
        .collect())
}

/// `floor(pi/4 * sqrt(N / M))`.
pub fn optimal_iterations(n: usize, marked: usize) -> usize {
    (PI / 4.0 * (n as f64 / marked as f64).sqrt()).floor() as usize
}

/// `sin^2((2r + 1) * asin(sqrt(M / N)))`, the probability of measuring some
/// marked index after `r` iterations.
pub fn success_probability(n: usize, marked: usize, iterations: usize) -> f64 {
    let theta = (marked as f64 / n as f64).sqrt().asin();
    ((2 * iterations + 1) as f64 * theta).sin().powi(2)
}

fn layer(circuit: &mut Circuit, gates: Vec<Gate>) {
    if !gates.is_empty() {
        circuit
            .push_bundle(Bundle::new(gates).expect("disjoint single-qubit gates"))
            .expect("indices below k");
    }
}

fn check_marked(k: usize, marked: &[usize]) -> Result<(), KernelError> {
    if k == 0 {
        return Err(KernelError::NotPowerOfTwo(1));
    }
    if let Some(&m) = marked.iter().find(|&&m| m >> k != 0) {
        return Err(KernelError::MarkedOutOfRange { index: m, size: 1 << k });
    }
    Ok(())
}

/// Diagonal `-1` on each marked basis state: per state, X on its zero bits,
/// a `k`-qubit multi-controlled Z, then the same X layer again.
pub fn phase_oracle(k: usize, marked: &[usize]) -> Result<Circuit, KernelError> {
    check_marked(k, marked)?;
    let mut c = Circuit::new(k).expect("k > 0");
    let all: Vec<usize> = (0..k).collect();
    for &m in marked {
        let zeros: Vec<Gate> = (0..k).filter(|q| m >> q & 1 == 0).map(Gate::x).collect();
        layer(&mut c, zeros.clone());
        c.push_gate(Gate::mcz(all.clone())).expect("indices below k");
        layer(&mut c, zeros);
    }
    Ok(c)
}

/// `H X MCZ X H` on all `k` qubits: reflection about the uniform state
/// (up to a global sign).
pub fn diffusion(k: usize) -> Circuit {
    let mut c = Circuit::new(k).expect("k > 0");
    let all: Vec<usize> = (0..k).collect();
    layer(&mut c, all.iter().map(|&q| Gate::h(q)).collect());
    layer(&mut c, all.iter().map(|&q| Gate::x(q)).collect());
    c.push_gate(Gate::mcz(all.clone())).expect("indices below k");
    layer(&mut c, all.iter().map(|&q| Gate::x(q)).collect());
    layer(&mut c, all.iter().map(|&q| Gate::h(q)).collect());
    c
}

/// Full search circuit: uniform superposition, `iterations` rounds of
/// oracle plus diffusion, then measurement of every index qubit.
pub fn grover_build(k: usize, marked: &[usize], iterations: usize) -> Result<Circuit, KernelError> {
    let oracle = phase_oracle(k, marked)?;
    let diffuse = diffusion(k);
    let mut c = Circuit::new(k).expect("k > 0");
    layer(&mut c, (0..k).map(Gate::h).collect());
    for _ in 0..iterations {
        c.extend(&oracle).expect("same width");
        c.extend(&diffuse).expect("same width");
    }
    layer(&mut c, (0..k).map(Gate::measure).collect());
    Ok(c)
}

/// How many Grover iterations to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Iterations {
    /// `floor(pi/4 * sqrt(N/M))` from the classical match count.
    #[default]
    Exact,
    /// `floor(pi/4 * sqrt(N))`, as if a single match were expected.
    UnknownCount,
    Fixed(usize),
}

#[derive(Debug, Clone, Default)]
pub struct AlignOptions {
    pub iterations: Iterations,
    /// Compile onto this device (MCZ expanded, routed) before running.
    /// `None` runs the algorithm-level circuit directly.
    pub topology: Option<Topology>,
    pub run: RunOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentHit {
    pub index: usize,
    pub count: u64,
    pub frequency: f64,
    /// `None` for padding entries.
    pub slice: Option<String>,
    pub mismatches: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentResult {
    pub read: String,
    pub max_mismatch: usize,
    pub entries: usize,
    pub marked: Vec<usize>,
    pub iterations: usize,
    pub shots: u64,
    pub seed: u64,
    /// Observed indices, most frequent first, ties by index.
    pub ranking: Vec<AlignmentHit>,
}

/// Histogram keys (all `k` qubits measured) as index counts.
fn index_counts(summary: &RunSummary) -> Vec<(usize, u64)> {
    summary
        .histogram
        .iter()
        .map(|(key, &count)| (usize::from_str_radix(key, 2).unwrap_or(0), count))
        .collect()
}

pub fn grover_align(
    index: &ReferenceIndex,
    query: &AlignmentQuery,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
    options: &AlignOptions,
) -> Result<AlignmentResult, KernelError> {
    let marked = marked_indices(index, query)?;
    let n = index.len();
    let iterations = match options.iterations {
        Iterations::Exact if marked.is_empty() => return Err(KernelError::NoMatchKnown),
        Iterations::Exact => optimal_iterations(n, marked.len()),
        Iterations::UnknownCount => optimal_iterations(n, 1),
        Iterations::Fixed(r) => r,
    };
    let k = index.index_qubits();
    let circuit = grover_build(k, &marked, iterations)?;

    let counts = match &options.topology {
        None => index_counts(&simulator::run_with(&circuit, noise, shots, seed, &options.run)?),
        Some(topo) => {
            let scheduled = compiler::compile(&circuit, topo, &CompileOptions::default())?;
            let summary = simulator::run_with(&scheduled, noise, shots, seed, &options.run)?;
            index_counts(&scheduled.logical_summary(&summary, k))
        }
    };

    let mut ranking: Vec<AlignmentHit> = counts
        .into_iter()
        .map(|(i, count)| AlignmentHit {
            index: i,
            count,
            frequency: count as f64 / shots as f64,
            slice: index.slice(i).map(str::to_string),
            mismatches: index.slice(i).map(|s| hamming(s, &query.read)),
        })
        .collect();
    ranking.sort_by(|a, b| b.count.cmp(&a.count).then(a.index.cmp(&b.index)));

    Ok(AlignmentResult {
        read: query.read.clone(),
        max_mismatch: query.max_mismatch,
        entries: n,
        marked,
        iterations,
        shots,
        seed,
        ranking,
    })
}

/// Seeded i.i.d. uniform sequence over A, C, G, T.
pub fn random_dna(length: usize, seed: u64) -> String {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..length).map(|_| ['A', 'C', 'G', 'T'][rng.gen_range(0..4)]).collect()
}
