use std::f64::consts::PI;

use serde::Serialize;

use crate::ir::{Circuit, Gate};
use crate::simulator::{self, NoiseModel, RunOptions, RunSummary};

use super::qubo::{bits_from_spins, Assignment, IsingModel};
use super::OptError;

/// Per-layer cost angles `gammas` and mixer angles `betas`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QaoaParams {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self, OptError> {
        if gammas.is_empty() || gammas.len() != betas.len() {
            return Err(OptError::BadParams(format!(
                "{} gammas and {} betas; need equal, non-zero counts",
                gammas.len(),
                betas.len()
            )));
        }
        Ok(QaoaParams { gammas, betas })
    }

    pub fn zeros(layers: usize) -> Result<Self, OptError> {
        QaoaParams::new(vec![0.0; layers], vec![0.0; layers])
    }

    pub fn layers(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }
}

/// Gates in the circuit built by [`qaoa_build`]:
/// `n + p * (n_h + 3 * n_J + n) + n`.
pub fn qaoa_gate_count(ising: &IsingModel, layers: usize) -> usize {
    let n = ising.n();
    let fields = ising.h().iter().filter(|&&h| h != 0.0).count();
    let couplings = ising.couplings().count();
    n + layers * (fields + 3 * couplings + n) + n
}

fn qaoa_unitary(ising: &IsingModel, params: &QaoaParams) -> Result<Circuit, OptError> {
    let n = ising.n();
    let mut c = Circuit::new(n).map_err(|_| OptError::InvalidModel("model has no spins".into()))?;
    let push = |c: &mut Circuit, g: Gate| c.push_gate(g).expect("indices below n");
    for q in 0..n {
        push(&mut c, Gate::h(q));
    }
    for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
        for (q, &h) in ising.h().iter().enumerate() {
            if h != 0.0 {
                push(&mut c, Gate::rz(q, 2.0 * gamma * h));
            }
        }
        for (i, j, coupling) in ising.couplings() {
            push(&mut c, Gate::cnot(i, j));
            push(&mut c, Gate::rz(j, 2.0 * gamma * coupling));
            push(&mut c, Gate::cnot(i, j));
        }
        for q in 0..n {
            push(&mut c, Gate::rx(q, 2.0 * beta));
        }
    }
    Ok(c)
}

/// Standard QAOA circuit: `H` on every qubit, then per layer the cost phase
/// (`RZ(2 gamma h_i)` per field, `CNOT-RZ(2 gamma J_ij)-CNOT` per coupling)
/// and the mixer `RX(2 beta)` on every qubit, then measure everything.
///
/// Spin `s_q` is the Z eigenvalue of qubit `q`: bit 0 reads as `+1`.
pub fn qaoa_build(ising: &IsingModel, params: &QaoaParams, max_qubits: usize) -> Result<Circuit, OptError> {
    if ising.n() > max_qubits {
        return Err(OptError::TooManyQubits {
            n: ising.n(),
            max: max_qubits,
        });
    }
    let mut c = qaoa_unitary(ising, params)?;
    for q in 0..ising.n() {
        c.push_gate(Gate::measure(q)).expect("index below n");
    }
    Ok(c)
}

/// Spins from a histogram key of a fully measured QAOA circuit.
pub fn spins_from_key(key: &str) -> Vec<i8> {
    key.bytes().rev().map(|b| if b == b'1' { -1 } else { 1 }).collect()
}

/// Mean energy over a run's histogram, plus the lowest-energy outcome.
fn histogram_energy(ising: &IsingModel, summary: &RunSummary) -> Result<(f64, Assignment), OptError> {
    let mut total = 0.0;
    let mut best: Option<Assignment> = None;
    for (key, &count) in &summary.histogram {
        let spins = spins_from_key(key);
        let e = ising.energy(&spins)?;
        total += e * count as f64;
        if best.as_ref().is_none_or(|b| e < b.energy) {
            best = Some(Assignment {
                bits: bits_from_spins(&spins),
                energy: e,
            });
        }
    }
    let best = best.ok_or_else(|| OptError::BadParams("no shots".into()))?;
    Ok((total / summary.shots as f64, best))
}

/// Exact `<H>` from the statevector, no sampling.
pub fn qaoa_expectation(ising: &IsingModel, params: &QaoaParams) -> Result<f64, OptError> {
    let c = qaoa_unitary(ising, params)?;
    let state = simulator::statevector(&c)?;
    let mut total = 0.0;
    let mut spins = vec![0i8; ising.n()];
    for (index, p) in state.probabilities().into_iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (q, s) in spins.iter_mut().enumerate() {
            *s = if index >> q & 1 == 1 { -1 } else { 1 };
        }
        total += p * ising.energy(&spins)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QaoaOptions {
    pub layers: usize,
    pub shots_per_eval: u64,
    pub seed: u64,
    /// Maximum number of circuit evaluations.
    pub budget: usize,
    pub max_qubits: usize,
}

impl Default for QaoaOptions {
    fn default() -> Self {
        QaoaOptions {
            layers: 1,
            shots_per_eval: 256,
            seed: 0,
            budget: 200,
            max_qubits: simulator::DEFAULT_MAX_QUBITS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QaoaReport {
    pub params: QaoaParams,
    /// Mean sampled energy at `params`.
    pub mean_energy: f64,
    /// Lowest-energy outcome sampled across every evaluation; bits use the
    /// QUBO convention `x = (1 + s) / 2`.
    pub best: Assignment,
    pub evaluations: usize,
}

const GRID_STEPS: usize = 8;
const MIN_STEP: f64 = 1e-3;

struct Search<'a> {
    ising: &'a IsingModel,
    options: &'a QaoaOptions,
    evaluations: usize,
    best_sample: Option<Assignment>,
}

impl Search<'_> {
    fn exhausted(&self) -> bool {
        self.evaluations >= self.options.budget
    }

    fn evaluate(&mut self, params: &QaoaParams) -> Result<f64, OptError> {
        let circuit = qaoa_build(self.ising, params, self.options.max_qubits)?;
        self.evaluations += 1;
        // Every evaluation reuses the same seed, so nearby angles are
        // compared on common random numbers.
        let summary = simulator::run_with(
            &circuit,
            &NoiseModel::perfect(),
            self.options.shots_per_eval,
            self.options.seed,
            &RunOptions {
                max_qubits: self.options.max_qubits,
            },
        )?;
        let (mean, sample) = histogram_energy(self.ising, &summary)?;
        if self.best_sample.as_ref().is_none_or(|b| sample.energy < b.energy) {
            self.best_sample = Some(sample);
        }
        Ok(mean)
    }
}

/// Derivative-free search over QAOA angles.
///
/// Each layer in turn gets an 8x8 grid over `gamma in [0, pi)`,
/// `beta in [0, pi/2)` with the other layers held fixed; then coordinate
/// descent tries `+-step` on every angle, halving the steps whenever a full
/// pass brings no improvement. Stops when the evaluation budget runs out or
/// the steps drop below 1e-3.
pub fn qaoa_optimize(ising: &IsingModel, options: &QaoaOptions) -> Result<QaoaReport, OptError> {
    if options.budget == 0 {
        return Err(OptError::BadParams("evaluation budget must be at least 1".into()));
    }
    if options.shots_per_eval == 0 {
        return Err(OptError::BadParams("shots per evaluation must be at least 1".into()));
    }
    let mut search = Search {
        ising,
        options,
        evaluations: 0,
        best_sample: None,
    };
    let mut params = QaoaParams::zeros(options.layers)?;
    let mut current = f64::INFINITY;

    'grid: for layer in 0..options.layers {
        let mut layer_best = (params.gammas[layer], params.betas[layer]);
        for a in 0..GRID_STEPS {
            for b in 0..GRID_STEPS {
                if search.exhausted() {
                    params.gammas[layer] = layer_best.0;
                    params.betas[layer] = layer_best.1;
                    break 'grid;
                }
                let mut trial = params.clone();
                trial.gammas[layer] = PI * a as f64 / GRID_STEPS as f64;
                trial.betas[layer] = PI / 2.0 * b as f64 / GRID_STEPS as f64;
                let e = search.evaluate(&trial)?;
                if e < current {
                    current = e;
                    layer_best = (trial.gammas[layer], trial.betas[layer]);
                }
            }
        }
        params.gammas[layer] = layer_best.0;
        params.betas[layer] = layer_best.1;
    }

    let mut gamma_step = PI / (2 * GRID_STEPS) as f64;
    let mut beta_step = PI / (4 * GRID_STEPS) as f64;
    'descent: while gamma_step >= MIN_STEP {
        let mut improved = false;
        for layer in 0..options.layers {
            for coordinate in 0..2 {
                for direction in [1.0, -1.0] {
                    if search.exhausted() {
                        break 'descent;
                    }
                    let mut trial = params.clone();
                    if coordinate == 0 {
                        trial.gammas[layer] += direction * gamma_step;
                    } else {
                        trial.betas[layer] += direction * beta_step;
                    }
                    let e = search.evaluate(&trial)?;
                    if e < current {
                        current = e;
                        params = trial;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            gamma_step /= 2.0;
            beta_step /= 2.0;
        }
    }

    Ok(QaoaReport {
        params,
        mean_energy: current,
        best: search.best_sample.expect("at least one evaluation"),
        evaluations: search.evaluations,
    })
}
