//! `qstack` command-line tool. JSON goes to stdout, diagnostics to stderr.
//!
//! Exit codes: 0 success, 1 domain failure (solver, oracle, resource cap),
//! 2 usage or input error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use qstack::compiler::PlacementStrategy;
use qstack::simulator::NoiseModel;

#[derive(Parser)]
#[command(name = "qstack", version, about = "Quantum assembly toolchain, simulator and application kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Map, route and schedule a circuit onto a device topology.
    Compile(CompileArgs),
    /// Run a circuit on the state-vector simulator.
    Sim(SimArgs),
    /// Solve a travelling-salesperson instance via its QUBO encoding.
    Tsp(TspArgs),
    /// Minimize a QUBO model given as JSON.
    Qubo(QuboArgs),
    /// Align a read against a reference with Grover search.
    Align(AlignArgs),
    /// Single-qubit randomized benchmarking.
    Rb(RbArgs),
}

#[derive(Args)]
struct CompileArgs {
    /// Assembly source file.
    input: PathBuf,
    /// Topology JSON (`{"grid": [rows, cols]}` or `{"edges": [[a, b], ...]}`).
    #[arg(long)]
    topology: PathBuf,
    /// Where to write the scheduled assembly; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the placement/SWAP/latency report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Initial placement: `identity` or `degree`.
    #[arg(long, default_value = "identity")]
    placement: PlacementStrategy,
}

#[derive(Args)]
struct SimArgs {
    input: PathBuf,
    /// `perfect` or `depolarizing:<p>[:flip=<q>]`.
    #[arg(long, default_value = "perfect")]
    noise: NoiseModel,
    #[arg(long, default_value_t = 1024)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TspMethod {
    Brute,
    Anneal,
    Qaoa,
}

#[derive(Args)]
#[command(group(ArgGroup::new("instance").required(true).args(["cities", "weights"])))]
struct TspArgs {
    /// CSV of `city_id,x,y` rows.
    #[arg(long)]
    cities: Option<PathBuf>,
    /// JSON distance matrix.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "anneal")]
    method: TspMethod,
    /// Constraint penalty; defaults to 2 * N * max weight.
    #[arg(long)]
    penalty: Option<f64>,
    #[arg(long, default_value_t = 25)]
    restarts: usize,
    #[arg(long, default_value_t = 5000)]
    sweeps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// QAOA layers.
    #[arg(long, default_value_t = 1)]
    layers: usize,
    /// QAOA shots per evaluation.
    #[arg(long, default_value_t = 256)]
    shots: u64,
    /// QAOA evaluation budget.
    #[arg(long, default_value_t = 200)]
    budget: usize,
    /// Also write the QUBO model as JSON.
    #[arg(long)]
    emit_qubo: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QuboMethod {
    Brute,
    Anneal,
}

#[derive(Args)]
struct QuboArgs {
    /// `{"n": N, "terms": [[i, j, c], ...], "offset": c0}`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value = "anneal")]
    method: QuboMethod,
    #[arg(long, default_value_t = 25)]
    restarts: usize,
    #[arg(long, default_value_t = 5000)]
    sweeps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IterationRule {
    /// Use the classical match count.
    Exact,
    /// Assume a single match.
    Unknown,
}

#[derive(Args)]
struct AlignArgs {
    /// Plain-text reference over A, C, G, T.
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    read: String,
    /// Hamming tolerance.
    #[arg(long, default_value_t = 0)]
    mismatch: usize,
    #[arg(long, default_value = "perfect")]
    noise: NoiseModel,
    #[arg(long, default_value_t = 1024)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "exact")]
    iterations: IterationRule,
    /// Run the compiled circuit on this topology instead of the native one.
    #[arg(long)]
    topology: Option<PathBuf>,
}

#[derive(Args)]
struct RbArgs {
    /// Depolarizing probability per gate.
    #[arg(long, default_value_t = 0.01)]
    p: f64,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32,64,128,256")]
    lengths: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    sequences: usize,
    #[arg(long, default_value_t = 500)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Compile(a) => commands::compile(a),
        Command::Sim(a) => commands::sim(a),
        Command::Tsp(a) => commands::tsp(a),
        Command::Qubo(a) => commands::qubo(a),
        Command::Align(a) => commands::align(a),
        Command::Rb(a) => commands::rb(a),
    };
    match result {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            if let Some(stdout) = &f.stdout {
                print!("{stdout}");
            }
            eprintln!("qstack: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
