use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::qubo::{Assignment, QuboModel};
use super::OptError;

/// Geometric cooling `T_k = T_0 * alpha^k`, one step per sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnealSchedule {
    pub sweeps: usize,
    pub alpha: f64,
    /// Starting temperature; estimated from random flips when `None`.
    pub initial_temperature: Option<f64>,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            sweeps: 5000,
            alpha: 0.99,
            initial_temperature: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnealReport {
    pub best: Assignment,
    /// Best energy seen in each restart, in restart order.
    pub restart_energies: Vec<f64>,
    pub restarts: usize,
    pub sweeps: usize,
    pub initial_temperature: f64,
    pub accepted_moves: u64,
}

const TEMPERATURE_PROBES: usize = 100;

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64 + 1);
    rng
}

/// Largest `|dE|` seen over a random walk of single-bit flips.
fn estimate_temperature(model: &QuboModel, seed: u64) -> f64 {
    let dense = model.dense();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bits: Vec<u8> = (0..model.n()).map(|_| rng.gen_range(0..2)).collect();
    let mut fields = dense.fields(&bits);
    let mut max_delta: f64 = 0.0;
    for _ in 0..TEMPERATURE_PROBES {
        let i = rng.gen_range(0..model.n());
        max_delta = max_delta.max(dense.flip(&mut bits, &mut fields, i).abs());
    }
    if max_delta > 0.0 {
        max_delta
    } else {
        1.0
    }
}

/// Simulated annealing with single-bit-flip Metropolis moves.
///
/// Restart `r` runs on its own stream of a generator seeded with `seed`,
/// so the best-of-`k` energy can only improve as `k` grows.
pub fn anneal(
    model: &QuboModel,
    schedule: &AnnealSchedule,
    restarts: usize,
    seed: u64,
) -> Result<AnnealReport, OptError> {
    let n = model.n();
    if n == 0 {
        return Err(OptError::InvalidModel("annealing needs at least one variable".into()));
    }
    if restarts == 0 {
        return Err(OptError::InvalidModel("at least one restart is required".into()));
    }
    if !(schedule.alpha > 0.0 && schedule.alpha <= 1.0) {
        return Err(OptError::InvalidModel(format!("cooling factor {} outside (0, 1]", schedule.alpha)));
    }
    let dense = model.dense();
    let t0 = schedule
        .initial_temperature
        .unwrap_or_else(|| estimate_temperature(model, seed));

    let mut best: Option<Assignment> = None;
    let mut restart_energies = Vec::with_capacity(restarts);
    let mut accepted_moves = 0u64;
    for r in 0..restarts {
        let mut rng = restart_rng(seed, r);
        let mut bits: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let mut fields = dense.fields(&bits);
        let mut energy = model.evaluate(&bits)?;
        let mut run_best = (energy, bits.clone());
        let mut temperature = t0;
        for _ in 0..schedule.sweeps {
            for i in 0..n {
                let delta = if bits[i] == 0 { fields[i] } else { -fields[i] };
                let accept = delta <= 0.0 || {
                    let x = delta / temperature;
                    x < 50.0 && rng.gen::<f64>() < (-x).exp()
                };
                if accept {
                    energy += dense.flip(&mut bits, &mut fields, i);
                    accepted_moves += 1;
                    if energy < run_best.0 {
                        run_best = (energy, bits.clone());
                    }
                }
            }
            temperature *= schedule.alpha;
        }
        let candidate = model.assignment(run_best.1)?;
        restart_energies.push(candidate.energy);
        if best.as_ref().is_none_or(|b| candidate.energy < b.energy) {
            best = Some(candidate);
        }
    }
    Ok(AnnealReport {
        best: best.expect("at least one restart"),
        restart_energies,
        restarts,
        sweeps: schedule.sweeps,
        initial_temperature: t0,
        accepted_moves,
    })
}
