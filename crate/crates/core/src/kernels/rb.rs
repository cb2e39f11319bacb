//! Single-qubit randomized benchmarking on the noisy simulator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ir::{Circuit, Gate};
use crate::seeding::substream_seed;
use crate::simulator::{self, NoiseModel};

use super::clifford::{CliffordTable, GROUP_ORDER};
use super::KernelError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RbConfig {
    pub sequence_lengths: Vec<usize>,
    pub sequences_per_length: usize,
    pub shots: u64,
    pub gate_error_p: f64,
}

impl Default for RbConfig {
    fn default() -> Self {
        RbConfig {
            sequence_lengths: vec![2, 4, 8, 16, 32, 64, 128, 256],
            sequences_per_length: 30,
            shots: 500,
            gate_error_p: 0.01,
        }
    }
}

impl RbConfig {
    fn validate(&self) -> Result<(), KernelError> {
        let bad = |msg: &str| Err(KernelError::InvalidConfig(msg.to_string()));
        if self.sequence_lengths.len() < 2 {
            return bad("need at least two sequence lengths");
        }
        if self.sequence_lengths[0] == 0 || self.sequence_lengths.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sequence lengths must be positive and strictly increasing");
        }
        if self.sequences_per_length == 0 || self.shots == 0 {
            return bad("sequences per length and shots must be positive");
        }
        if !(0.0..=1.0).contains(&self.gate_error_p) {
            return bad("gate error probability outside [0, 1]");
        }
        Ok(())
    }
}

/// Survival statistics at one sequence length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthPoint {
    pub length: usize,
    pub mean: f64,
    /// Spread across sequences.
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RbResult {
    pub gate_error_p: f64,
    pub seed: u64,
    pub points: Vec<LengthPoint>,
    pub a: f64,
    pub b: f64,
    pub decay_f: f64,
    pub error_per_clifford: f64,
    /// Physical gates per Clifford, averaged over the group.
    pub mean_gates_per_clifford: f64,
    /// Error per Clifford expected from the noise model.
    pub predicted_error_per_clifford: f64,
}

impl RbResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

/// `length` uniform Cliffords followed by their recovery element.
pub fn rb_sequence<R: Rng>(length: usize, rng: &mut R) -> Vec<usize> {
    let table = CliffordTable::get();
    let mut seq: Vec<usize> = (0..length).map(|_| rng.gen_range(0..GROUP_ORDER)).collect();
    seq.push(table.recovery(&seq));
    seq
}

/// One qubit, each Clifford's gates in turn, then a measurement.
pub fn rb_circuit(sequence: &[usize]) -> Circuit {
    let table = CliffordTable::get();
    let gates = sequence
        .iter()
        .flat_map(|&c| table.element(c).circuit_gates(0))
        .chain(std::iter::once(Gate::measure(0)));
    Circuit::from_gates(1, gates).expect("single-qubit gates")
}

/// Least-squares fit of `A * f^m + B`.
///
/// `f` is scanned over `[0, 1]` from the top with only strict improvements
/// accepted; `A` and `B` are linear given `f`. Returns `(a, b, f)`.
pub fn fit_decay(lengths: &[usize], survival: &[f64]) -> (f64, f64, f64) {
    const STEPS: usize = 100_000;
    let n = survival.len() as f64;
    let y_mean = survival.iter().sum::<f64>() / n;
    let fit_at = |f: f64| -> (f64, f64, f64) {
        let xs: Vec<f64> = lengths.iter().map(|&m| f.powi(m as i32)).collect();
        let x_mean = xs.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(survival).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
        let a = if sxx > 1e-15 { sxy / sxx } else { 0.0 };
        let b = y_mean - a * x_mean;
        let sse = xs.iter().zip(survival).map(|(x, y)| (a * x + b - y).powi(2)).sum();
        (a, b, sse)
    };
    let (mut best_a, mut best_b, mut best_sse) = fit_at(1.0);
    let mut best_f = 1.0;
    for step in (0..STEPS).rev() {
        let f = step as f64 / STEPS as f64;
        let (a, b, sse) = fit_at(f);
        if sse < best_sse - 1e-15 {
            (best_a, best_b, best_sse, best_f) = (a, b, sse, f);
        }
    }
    (best_a, best_b, best_f)
}

/// `(1 - mean_C lambda^{g_C}) / 2` with `lambda = 1 - 4p/3`, where `g_C` is
/// the gate count of Clifford `C`.
pub fn predicted_error_per_clifford(gate_error_p: f64) -> f64 {
    let lambda = 1.0 - 4.0 * gate_error_p / 3.0;
    let table = CliffordTable::get();
    let f = table.elements().iter().map(|e| lambda.powi(e.gate_count() as i32)).sum::<f64>() / GROUP_ORDER as f64;
    (1.0 - f) / 2.0
}

pub fn run_rb(config: &RbConfig, seed: u64) -> Result<RbResult, KernelError> {
    config.validate()?;
    let noise = if config.gate_error_p > 0.0 {
        NoiseModel::depolarizing(config.gate_error_p, 0.0)?
    } else {
        NoiseModel::perfect()
    };
    let per = config.sequences_per_length;
    let mut points = Vec::with_capacity(config.sequence_lengths.len());
    for (li, &length) in config.sequence_lengths.iter().enumerate() {
        let mut survival = Vec::with_capacity(per);
        for si in 0..per {
            let task = (li * per + si) as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(seed, 2 * task));
            let circuit = rb_circuit(&rb_sequence(length, &mut rng));
            let summary = simulator::run(&circuit, &noise, config.shots, substream_seed(seed, 2 * task + 1))?;
            survival.push(summary.frequency("0"));
        }
        let mean = survival.iter().sum::<f64>() / per as f64;
        let var = if per > 1 {
            survival.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (per - 1) as f64
        } else {
            0.0
        };
        points.push(LengthPoint {
            length,
            mean,
            stddev: var.sqrt(),
        });
    }

    for w in points.windows(2) {
        let se = ((w[0].stddev.powi(2) + w[1].stddev.powi(2)) / per as f64).sqrt();
        if w[1].mean > w[0].mean + 3.0 * se + 1e-9 {
            return Err(KernelError::FitFailed(format!(
                "survival rises from {:.4} at m={} to {:.4} at m={}",
                w[0].mean, w[0].length, w[1].mean, w[1].length
            )));
        }
    }

    let means: Vec<f64> = points.iter().map(|p| p.mean).collect();
    let (a, b, f) = fit_decay(&config.sequence_lengths, &means);
    Ok(RbResult {
        gate_error_p: config.gate_error_p,
        seed,
        points,
        a,
        b,
        decay_f: f,
        error_per_clifford: (1.0 - f) / 2.0,
        mean_gates_per_clifford: CliffordTable::get().mean_gate_count(),
        predicted_error_per_clifford: predicted_error_per_clifford(config.gate_error_p),
    })
}
