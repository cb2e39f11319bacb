use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use qstack::compiler::{compile as compile_circuit, CompileError, CompileOptions, Topology};
use qstack::ir::{self, Circuit};
use qstack::kernels::{
    grover_align, run_rb, AlignOptions, AlignmentQuery, Iterations, KernelError, RbConfig, ReferenceIndex,
};
use qstack::optimizer::{
    anneal, brute_force, default_penalty, encode_tsp, qaoa_optimize, qubo_to_ising, AnnealSchedule, OptError,
    QaoaOptions, QuboModel, TspInstance, EXACT_TOUR_MAX_CITIES,
};
use qstack::simulator::{run_with, RunOptions, SimError};

use crate::{AlignArgs, CompileArgs, IterationRule, QuboArgs, QuboMethod, RbArgs, SimArgs, TspArgs, TspMethod};

pub struct Failure {
    pub code: u8,
    pub message: String,
    /// Partial result still worth printing.
    pub stdout: Option<String>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
            stdout: None,
        }
    }

    fn domain(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
            stdout: None,
        }
    }
}

type Outcome = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::domain(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn load_circuit(path: &Path) -> Result<Circuit, Failure> {
    ir::parse(&read(path)?).map_err(|e| Failure::usage(format!("{}:{e}", path.display())))
}

fn load_topology(path: &Path) -> Result<Topology, Failure> {
    Topology::from_json(&read(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn sim_failure(e: SimError) -> Failure {
    match e {
        SimError::BadNoiseSpec(_) | SimError::InvalidProbability(_) => Failure::usage(e.to_string()),
        _ => Failure::domain(e.to_string()),
    }
}

fn compile_failure(e: CompileError) -> Failure {
    match e {
        CompileError::InvalidTopology(_) | CompileError::UnknownStrategy(_) => Failure::usage(e.to_string()),
        _ => Failure::domain(e.to_string()),
    }
}

fn opt_failure(e: OptError) -> Failure {
    match e {
        OptError::Sim(e) => sim_failure(e),
        OptError::TooManyQubits { .. } => Failure::domain(e.to_string()),
        _ => Failure::usage(e.to_string()),
    }
}

fn kernel_failure(e: KernelError) -> Failure {
    match e {
        KernelError::InvalidSequence(_) | KernelError::InvalidConfig(_) => Failure::usage(e.to_string()),
        KernelError::Sim(e) => sim_failure(e),
        KernelError::Compile(e) => compile_failure(e),
        _ => Failure::domain(e.to_string()),
    }
}

pub fn compile(args: CompileArgs) -> Outcome {
    let circuit = load_circuit(&args.input)?;
    let topology = load_topology(&args.topology)?;
    let options = CompileOptions {
        placement: args.placement,
    };
    let scheduled = compile_circuit(&circuit, &topology, &options).map_err(compile_failure)?;
    let qasm = scheduled.to_qasm();
    let report = to_json(&scheduled.report(circuit.num_qubits()));
    match &args.out {
        None => {
            if let Some(path) = &args.report {
                write(path, &report)?;
            }
            Ok(qasm)
        }
        Some(out) => {
            write(out, &qasm)?;
            match &args.report {
                Some(path) => {
                    write(path, &report)?;
                    Ok(String::new())
                }
                None => Ok(report),
            }
        }
    }
}

pub fn sim(args: SimArgs) -> Outcome {
    let circuit = load_circuit(&args.input)?;
    let summary = run_with(&circuit, &args.noise, args.shots, args.seed, &RunOptions::from_env()).map_err(sim_failure)?;
    Ok(to_json(&summary))
}

#[derive(Serialize)]
struct TspOutput {
    method: &'static str,
    cities: usize,
    variables: usize,
    penalty: f64,
    feasible: bool,
    tour: Option<Vec<usize>>,
    tour_labels: Option<Vec<String>>,
    cost: Option<f64>,
    energy: f64,
    bits: String,
    telemetry: serde_json::Value,
}

pub fn tsp(args: TspArgs) -> Outcome {
    let instance = match (&args.cities, &args.weights) {
        (Some(path), _) => TspInstance::from_csv(&read(path)?),
        (None, Some(path)) => TspInstance::from_json(&read(path)?),
        (None, None) => return Err(Failure::usage("one of --cities or --weights is required")),
    }
    .map_err(|e| Failure::usage(e.to_string()))?;
    let n = instance.num_cities();
    if args.method == TspMethod::Brute && n > EXACT_TOUR_MAX_CITIES {
        return Err(Failure::usage(format!(
            "brute force is capped at {EXACT_TOUR_MAX_CITIES} cities; this instance has {n}"
        )));
    }
    let penalty = args.penalty.unwrap_or_else(|| default_penalty(&instance));
    let (model, decoder) = encode_tsp(&instance, penalty).map_err(opt_failure)?;
    if let Some(path) = &args.emit_qubo {
        write(path, &model.to_json())?;
    }

    let (method, best, telemetry) = match args.method {
        TspMethod::Brute => {
            let (tour, cost) = instance.exact_tour().map_err(opt_failure)?;
            let best = model.assignment(decoder.encode(&tour)).map_err(opt_failure)?;
            ("brute", best, json!({ "enumerated_cost": cost }))
        }
        TspMethod::Anneal => {
            let schedule = AnnealSchedule {
                sweeps: args.sweeps,
                ..Default::default()
            };
            let report = anneal(&model, &schedule, args.restarts, args.seed).map_err(opt_failure)?;
            let telemetry = json!({
                "restarts": report.restarts,
                "sweeps": report.sweeps,
                "initial_temperature": report.initial_temperature,
                "accepted_moves": report.accepted_moves,
                "restart_energies": report.restart_energies,
                "seed": args.seed,
            });
            ("anneal", report.best, telemetry)
        }
        TspMethod::Qaoa => {
            let ising = qubo_to_ising(&model);
            let options = QaoaOptions {
                layers: args.layers,
                shots_per_eval: args.shots,
                seed: args.seed,
                budget: args.budget,
                max_qubits: RunOptions::from_env().max_qubits,
            };
            let report = qaoa_optimize(&ising, &options).map_err(opt_failure)?;
            let telemetry = json!({
                "layers": args.layers,
                "gammas": report.params.gammas(),
                "betas": report.params.betas(),
                "mean_energy": report.mean_energy,
                "evaluations": report.evaluations,
                "seed": args.seed,
            });
            ("qaoa", report.best, telemetry)
        }
    };

    let tour = decoder.decode(&best.bits);
    let output = TspOutput {
        method,
        cities: n,
        variables: model.n(),
        penalty,
        feasible: tour.is_some(),
        tour_labels: tour
            .as_ref()
            .map(|t| t.iter().map(|&c| instance.labels()[c].clone()).collect()),
        cost: tour.as_ref().map(|t| instance.tour_cost(t)),
        tour,
        energy: best.energy,
        bits: best.bitstring(),
        telemetry,
    };
    let text = to_json(&output);
    if output.feasible {
        Ok(text)
    } else {
        Err(Failure {
            stdout: Some(text),
            ..Failure::domain("best sample violates the one-hot constraints; no tour decoded")
        })
    }
}

pub fn qubo(args: QuboArgs) -> Outcome {
    let model = QuboModel::from_json(&read(&args.model)?).map_err(|e| Failure::usage(e.to_string()))?;
    let best = match args.method {
        QuboMethod::Brute => brute_force(&model).map_err(opt_failure)?,
        QuboMethod::Anneal => {
            let schedule = AnnealSchedule {
                sweeps: args.sweeps,
                ..Default::default()
            };
            anneal(&model, &schedule, args.restarts, args.seed).map_err(opt_failure)?.best
        }
    };
    Ok(to_json(&json!({
        "variables": model.n(),
        "bits": best.bitstring(),
        "energy": best.energy,
    })))
}

pub fn align(args: AlignArgs) -> Outcome {
    let reference = read(&args.reference)?;
    let topology = args.topology.as_deref().map(load_topology).transpose()?;
    let query = AlignmentQuery::new(&args.read, args.mismatch).map_err(kernel_failure)?;
    let index = ReferenceIndex::new(&reference, query.read().len()).map_err(kernel_failure)?;
    let options = AlignOptions {
        iterations: match args.iterations {
            IterationRule::Exact => Iterations::Exact,
            IterationRule::Unknown => Iterations::UnknownCount,
        },
        topology,
        run: RunOptions::from_env(),
    };
    let result = grover_align(&index, &query, &args.noise, args.shots, args.seed, &options).map_err(kernel_failure)?;
    Ok(to_json(&result))
}

pub fn rb(args: RbArgs) -> Outcome {
    let config = RbConfig {
        sequence_lengths: args.lengths,
        sequences_per_length: args.sequences,
        shots: args.shots,
        gate_error_p: args.p,
    };
    let result = run_rb(&config, args.seed).map_err(kernel_failure)?;
    Ok(to_json(&result))
}
