//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so criteria execute in order
//! with their own wall-clock limits. Exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qstack::compiler::{compile, CompileOptions, Topology};
use qstack::ir::{parse, print, Bundle, Circuit, Gate, Opcode};
use qstack::kernels::{grover_build, optimal_iterations, run_rb, success_probability, RbConfig};
use qstack::optimizer::{
    anneal, brute_force, encode_tsp, qaoa_build, qaoa_expectation, qaoa_optimize, qubo_to_ising, spins_from_bits,
    spins_from_key, AnnealSchedule, IsingModel, QaoaOptions, QaoaParams, QuboModel, TspInstance,
};
use qstack::simulator::{evolve, run, NoiseModel, QuantumState};

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, Box<dyn FnOnce(&mut Routed) -> Check>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

const FIXED: [Opcode; 8] = [
    Opcode::X,
    Opcode::Y,
    Opcode::Z,
    Opcode::H,
    Opcode::S,
    Opcode::Sdag,
    Opcode::T,
    Opcode::Tdag,
];

fn random_gate(rng: &mut ChaCha8Rng, n: usize, nonunitary: bool) -> Gate {
    let kinds = if nonunitary { 5 } else { 3 };
    match rng.gen_range(0..kinds) {
        0 => Gate::single(FIXED[rng.gen_range(0..FIXED.len())], rng.gen_range(0..n)),
        1 => {
            let op = [Opcode::Rx, Opcode::Ry, Opcode::Rz][rng.gen_range(0..3)];
            Gate::rotation(op, rng.gen_range(0..n), rng.gen_range(-2.0 * PI..2.0 * PI))
        }
        2 if n >= 2 => {
            let a = rng.gen_range(0..n);
            let b = (a + rng.gen_range(1..n)) % n;
            Gate::two([Opcode::Cnot, Opcode::Cz, Opcode::Swap][rng.gen_range(0..3)], a, b)
        }
        3 => Gate::measure(rng.gen_range(0..n)),
        4 => Gate::single(Opcode::PrepZ, rng.gen_range(0..n)),
        _ => Gate::h(rng.gen_range(0..n)),
    }
}

/// Bundles of up to three disjoint gates.
fn random_circuit(rng: &mut ChaCha8Rng, n: usize, bundles: usize, nonunitary: bool) -> Circuit {
    let mut c = Circuit::new(n).unwrap();
    for _ in 0..bundles {
        let mut used = vec![false; n];
        let mut gates = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let g = random_gate(rng, n, nonunitary);
            if g.qubits().iter().all(|&q| !used[q]) {
                g.qubits().iter().for_each(|&q| used[q] = true);
                gates.push(g);
            }
        }
        c.push_bundle(Bundle::new(gates).unwrap()).unwrap();
    }
    c
}

fn c1_round_trip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..500 {
        let n = rng.gen_range(1..=8);
        let bundles = rng.gen_range(0..=64);
        let c = random_circuit(&mut rng, n, bundles, true);
        let back = parse(&print(&c)).map_err(|e| format!("circuit {i}: {e}"))?;
        ensure(back == c, || format!("circuit {i} changed after print/parse"))?;
    }
    Ok("500 circuits".into())
}

fn c2_bell() -> Check {
    let c = parse("version 1.0\nqubits 2\nh q[0]\ncnot q[0], q[1]\nmeasure_z q[0]\nmeasure_z q[1]\n").unwrap();
    let s = run(&c, &NoiseModel::perfect(), 4096, 7).unwrap();
    let keys: BTreeSet<&str> = s.histogram.keys().map(String::as_str).collect();
    ensure(keys.is_subset(&BTreeSet::from(["00", "11"])), || format!("keys {keys:?}"))?;
    let (f00, f11) = (s.frequency("00"), s.frequency("11"));
    ensure((f00 - 0.5).abs() <= 0.024 && (f11 - 0.5).abs() <= 0.024, || format!("{f00} / {f11}"))?;
    Ok(format!("P(00)={f00:.4} P(11)={f11:.4}"))
}

fn c3_normalization() -> Check {
    ensure(cfg!(debug_assertions), || "built without the per-bundle norm assertion".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut bundles = 0usize;
    for _ in 0..200 {
        let n = rng.gen_range(1..=8);
        let c = random_circuit(&mut rng, n, 40, true);
        let p = rng.gen_range(0.0..0.1);
        let mut state = QuantumState::new(n);
        for b in c.bundles() {
            for g in b.gates() {
                state.apply_gate(g, &mut rng);
                if !g.opcode().is_nonunitary() {
                    state.apply_depolarizing(g.qubits(), p, &mut rng);
                }
            }
            worst = worst.max((state.norm_sqr().sqrt() - 1.0).abs());
            bundles += 1;
        }
        // The simulator also asserts after every bundle of each shot.
        run(&c, &NoiseModel::depolarizing(p, p).unwrap(), 8, rng.gen()).map_err(|e| e.to_string())?;
    }
    ensure(worst <= 1e-12, || format!("norm drift {worst:e}"))?;
    Ok(format!("{bundles} bundles, max drift {worst:.1e}"))
}

struct Routed {
    circuits: Vec<(Topology, qstack::compiler::ScheduledCircuit)>,
}

fn c4_routing_equivalence(routed: &mut Routed) -> Check {
    let topo = Topology::grid(2, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let c = random_circuit(&mut rng, 5, 30, false);
        let out = compile(&c, &topo, &CompileOptions::default()).map_err(|e| e.to_string())?;
        let start = QuantumState::random(5, &mut rng);
        let expected = evolve(&c, start.clone()).unwrap();
        let initial: Vec<usize> = (0..5).map(|l| out.initial_placement.physical(l)).collect();
        let end = evolve(&out.circuit, start.relabeled(&initial, 6)).unwrap();
        let fin: Vec<usize> = (0..5).map(|l| out.final_placement.physical(l)).collect();
        let diff = end.restricted(&fin).max_abs_diff(&expected);
        ensure(diff <= 1e-10, || format!("circuit {i}: diff {diff:e}"))?;
        worst = worst.max(diff);
        routed.circuits.push((topo.clone(), out));
    }
    Ok(format!("100 circuits, max diff {worst:.1e}"))
}

fn c5_adjacency(routed: &mut Routed) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (rows, cols) in [(1, 4), (3, 3), (2, 4)] {
        let topo = Topology::grid(rows, cols).unwrap();
        for _ in 0..50 {
            let n = rng.gen_range(2..=topo.num_positions());
            let c = random_circuit(&mut rng, n, 40, true);
            routed.circuits.push((topo.clone(), compile(&c, &topo, &CompileOptions::default()).unwrap()));
        }
    }
    let grover = grover_build(3, &[5], 2).unwrap();
    let line = Topology::line(3).unwrap();
    routed.circuits.push((line.clone(), compile(&grover, &line, &CompileOptions::default()).unwrap()));
    let mut two_qubit = 0usize;
    for (topo, out) in &routed.circuits {
        for g in out.circuit.gates() {
            match g.qubits() {
                [_] => {}
                [a, b] => {
                    ensure(topo.adjacent(*a, *b), || format!("{} on ({a}, {b})", g.opcode().name()))?;
                    two_qubit += 1;
                }
                qs => return Err(format!("{}-qubit gate left after compilation", qs.len())),
            }
        }
    }
    Ok(format!("{two_qubit} two-qubit gates over {} circuits", routed.circuits.len()))
}

fn c6_depolarizing() -> Check {
    let p = 0.03;
    let m = 100;
    let c = Circuit::from_gates(1, (0..m).map(|_| Gate::rz(0, 0.0)).chain([Gate::measure(0)])).unwrap();
    let s = run(&c, &NoiseModel::depolarizing(p, 0.0).unwrap(), 50_000, 6).unwrap();
    let expected = (1.0 + (1.0 - 4.0 * p / 3.0).powi(m)) / 2.0;
    let p0 = s.frequency("0");
    ensure((expected - 0.5085).abs() < 5e-4, || format!("closed form {expected}"))?;
    ensure((p0 - expected).abs() <= 0.01, || format!("P(0) = {p0}, expected {expected}"))?;
    Ok(format!("P(0)={p0:.4} vs {expected:.4}"))
}

fn c7_grover() -> Check {
    let r = optimal_iterations(8, 1);
    ensure(r == 2, || format!("r = {r}"))?;
    let c = grover_build(3, &[6], r).unwrap();
    let s = run(&c, &NoiseModel::perfect(), 20_000, 7).unwrap();
    let (top, count) = s.histogram.iter().max_by_key(|(_, &v)| v).unwrap();
    let f = *count as f64 / 20_000.0;
    let expected = success_probability(8, 1, 2);
    ensure(top == "110", || format!("top index {top}"))?;
    ensure((f - expected).abs() <= 0.015, || format!("{f} vs {expected}"))?;

    let c = grover_build(2, &[1], optimal_iterations(4, 1)).unwrap();
    let s = run(&c, &NoiseModel::perfect(), 20_000, 8).unwrap();
    ensure(s.frequency("01") == 1.0, || format!("N=4 histogram {:?}", s.histogram))?;
    Ok(format!("N=8: {f:.4} vs {expected:.4}; N=4: 1.0000"))
}

fn c8_tsp_encoding() -> Check {
    let square = TspInstance::from_points(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
    let (model, decoder) = encode_tsp(&square, 2.0 * 4.0 * square.max_weight()).unwrap();
    ensure(model.n() == 16, || format!("{} variables", model.n()))?;
    let best = brute_force(&model).unwrap();
    let tour = decoder.decode(&best.bits).ok_or("optimum is infeasible")?;
    let cost = square.tour_cost(&tour);
    ensure((cost - 4.0).abs() < 1e-9, || format!("tour {tour:?} costs {cost}"))?;
    ensure((best.energy - 4.0).abs() < 1e-9, || format!("energy {}", best.energy))?;
    Ok(format!("16 variables, tour {tour:?}, cost {cost}"))
}

fn random_qubo(rng: &mut ChaCha8Rng, n: usize) -> QuboModel {
    let mut m = QuboModel::new(n);
    for i in 0..n {
        for j in i..n {
            if rng.gen_bool(0.7) {
                m.add(i, j, rng.gen_range(-5.0..5.0)).unwrap();
            }
        }
    }
    m.set_offset(rng.gen_range(-2.0..2.0));
    m
}

fn c9_ising_isomorphism() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut evaluated = 0usize;
    for k in 0..50 {
        let n = rng.gen_range(1..=12);
        let q = random_qubo(&mut rng, n);
        let ising = qubo_to_ising(&q);
        let mut eq = Vec::with_capacity(1 << n);
        let mut ei = Vec::with_capacity(1 << n);
        for v in 0..1u32 << n {
            let bits: Vec<u8> = (0..n).map(|i| (v >> i & 1) as u8).collect();
            let a = q.evaluate(&bits).unwrap();
            let b = ising.energy(&spins_from_bits(&bits)).unwrap();
            ensure((a - b).abs() <= 1e-9, || format!("model {k}, assignment {v}: {a} vs {b}"))?;
            eq.push(a);
            ei.push(b);
        }
        let argmin = |e: &[f64]| -> BTreeSet<usize> {
            let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
            (0..e.len()).filter(|&i| e[i] <= lo + 1e-9).collect()
        };
        ensure(argmin(&eq) == argmin(&ei), || format!("model {k}: argmin sets differ"))?;
        evaluated += eq.len();
    }
    Ok(format!("50 models, {evaluated} assignments"))
}

fn c10_anneal() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut hits = 0;
    for k in 0..50 {
        let q = random_qubo(&mut rng, 12);
        let exact = brute_force(&q).unwrap();
        let r = anneal(&q, &AnnealSchedule::default(), 25, k).unwrap();
        ensure(r.best.energy >= exact.energy - 1e-9, || format!("instance {k} beat the exhaustive optimum"))?;
        if (r.best.energy - exact.energy).abs() <= 1e-9 {
            hits += 1;
        }
    }
    ensure(hits >= 45, || format!("{hits}/50 optimal"))?;
    Ok(format!("{hits}/50 optimal"))
}

fn c11_qaoa() -> Check {
    let mut spin = IsingModel::new(1);
    spin.add_field(0, 1.0).unwrap();
    let (gamma, beta) = (PI / 8.0, PI / 8.0);
    let c = qaoa_build(&spin, &QaoaParams::new(vec![gamma], vec![beta]).unwrap(), 25).unwrap();
    let s = run(&c, &NoiseModel::perfect(), 40_000, 11).unwrap();
    let z: f64 = s
        .histogram
        .iter()
        .map(|(k, &n)| f64::from(spins_from_key(k)[0]) * n as f64)
        .sum::<f64>()
        / 40_000.0;
    let expected = (2.0 * beta).sin() * (2.0 * gamma).sin();
    ensure((z - expected).abs() <= 0.02, || format!("<Z> = {z}, expected {expected}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let mut worst_gain = f64::NEG_INFINITY;
    for k in 0..10 {
        let ising = qubo_to_ising(&random_qubo(&mut rng, 6));
        let baseline = qaoa_expectation(&ising, &QaoaParams::zeros(1).unwrap()).unwrap();
        for seed in 0..20 {
            let report = qaoa_optimize(&ising, &QaoaOptions { seed, ..Default::default() }).map_err(|e| e.to_string())?;
            let optimized = qaoa_expectation(&ising, &report.params).unwrap();
            ensure(optimized <= baseline, || format!("model {k} seed {seed}: {optimized} > {baseline}"))?;
            worst_gain = worst_gain.max(optimized - baseline);
        }
    }
    Ok(format!("<Z>={z:.4} vs {expected:.4}; 200 runs, smallest improvement {:.3}", -worst_gain))
}

fn c12_rb() -> Check {
    let noiseless = RbConfig {
        gate_error_p: 0.0,
        ..RbConfig::default()
    };
    let r0 = run_rb(&noiseless, 12).map_err(|e| e.to_string())?;
    ensure((r0.decay_f - 1.0).abs() <= 1e-3, || format!("p=0 fits f={}", r0.decay_f))?;

    let r = run_rb(&RbConfig::default(), 12).map_err(|e| e.to_string())?;
    let means: Vec<f64> = r.points.iter().map(|p| p.mean).collect();
    ensure(means.windows(2).all(|w| w[1] < w[0]), || format!("survival not strictly decaying: {means:?}"))?;
    ensure(r.error_per_clifford > 0.0, || "non-positive error".into())?;
    let rel = (r.error_per_clifford - r.predicted_error_per_clifford).abs() / r.predicted_error_per_clifford;
    ensure(rel <= 0.3, || {
        format!("r={} vs predicted {} ({:.0}%)", r.error_per_clifford, r.predicted_error_per_clifford, rel * 100.0)
    })?;
    Ok(format!(
        "p=0 f={}; p=0.01 r={:.5} vs predicted {:.5}",
        r0.decay_f, r.error_per_clifford, r.predicted_error_per_clifford
    ))
}

fn c13_ghz20() -> Check {
    let n = 20;
    let gates = std::iter::once(Gate::h(0))
        .chain((0..n - 1).map(|q| Gate::cnot(q, q + 1)))
        .chain((0..n).map(Gate::measure));
    let c = Circuit::from_gates(n, gates).unwrap();
    let s = run(&c, &NoiseModel::perfect(), 100, 13).map_err(|e| e.to_string())?;
    let zeros = "0".repeat(n);
    let ones = "1".repeat(n);
    ensure(s.histogram.keys().all(|k| *k == zeros || *k == ones), || "non-GHZ outcome".into())?;
    Ok("20 qubits, 100 shots".into())
}

fn qstack(args: &[&str], dir: &Path) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_qstack"))
        .args(args)
        .current_dir(dir)
        .env_remove("QSTACK_MAX_QUBITS")
        .output()
        .expect("spawn qstack");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn c14_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let w = |name: &str, text: &str| std::fs::write(d.join(name), text).unwrap();
    w("ghz.qasm", "version 1.0\nqubits 4\nh q[3]\ncnot q[3], q[2]\ncnot q[2], q[1]\ncnot q[1], q[0]\n{ measure_z q[0] | measure_z q[1] | measure_z q[2] | measure_z q[3] }\n");
    w("line.json", "{\"grid\": [1, 4]}");
    w("square.csv", "city,x,y\nA,0,0\nB,1,0\nC,1,1\nD,0,1\n");
    w("tri.json", "[[0, 1, 2], [1, 0, 1.5], [2, 1.5, 0]]");
    w("model.json", "{\"n\": 3, \"terms\": [[0, 0, -1], [0, 1, 2], [1, 2, -1.5], [2, 2, 0.5]]}");
    w("ref.txt", "ACGTTGCAGGCCTTAAGATCCGTA\n");

    let runs: &[(&str, &[&str], &[&str])] = &[
        ("compile", &["compile", "ghz.qasm", "--topology", "line.json", "--out", "OUT.qasm", "--report", "OUT.json"], &["OUT.qasm", "OUT.json"]),
        ("sim", &["sim", "ghz.qasm", "--noise", "depolarizing:0.02:flip=0.01", "--shots", "2000", "--seed", "5"], &[]),
        ("tsp brute", &["tsp", "--cities", "square.csv", "--method", "brute"], &[]),
        ("tsp anneal", &["tsp", "--cities", "square.csv", "--method", "anneal", "--seed", "3", "--sweeps", "500", "--emit-qubo", "OUT.qubo"], &["OUT.qubo"]),
        ("tsp qaoa", &["tsp", "--weights", "tri.json", "--method", "qaoa", "--seed", "2", "--budget", "40"], &[]),
        ("qubo", &["qubo", "--model", "model.json", "--seed", "4"], &[]),
        ("align", &["align", "--ref", "ref.txt", "--read", "GCA", "--mismatch", "1", "--noise", "depolarizing:0.01", "--shots", "500", "--seed", "9"], &[]),
        ("align compiled", &["align", "--ref", "ref.txt", "--read", "TTA", "--topology", "line.json", "--shots", "300", "--seed", "9"], &[]),
        ("rb", &["rb", "--p", "0.02", "--lengths", "1,4,16", "--sequences", "5", "--shots", "100", "--seed", "6"], &[]),
    ];
    let mut checked = Vec::new();
    for (name, args, files) in runs {
        let read_files = || -> Vec<Vec<u8>> { files.iter().map(|f| std::fs::read(d.join(f)).unwrap_or_default()).collect() };
        let (code_a, out_a) = qstack(args, d);
        let files_a = read_files();
        let (code_b, out_b) = qstack(args, d);
        let files_b = read_files();
        ensure(code_a == code_b, || format!("{name}: exit codes {code_a} / {code_b}"))?;
        ensure(out_a == out_b && files_a == files_b, || format!("{name}: outputs differ"))?;
        ensure(code_a == 0 || *name == "tsp qaoa", || format!("{name}: exit {code_a}"))?;
        checked.push(*name);
    }
    Ok(format!("{} invocations", checked.len()))
}

fn main() {
    let mut routed = Routed { circuits: Vec::new() };
    let criteria: Vec<Criterion> = vec![
        ("parser round-trip", Duration::from_secs(5), Box::new(|_| c1_round_trip())),
        ("Bell correlation", Duration::from_secs(1), Box::new(|_| c2_bell())),
        ("normalization after every bundle", Duration::from_secs(60), Box::new(|_| c3_normalization())),
        ("routing semantic equivalence", Duration::from_secs(30), Box::new(c4_routing_equivalence)),
        ("routed adjacency", Duration::from_secs(30), Box::new(c5_adjacency)),
        ("depolarizing closed form", Duration::from_secs(10), Box::new(|_| c6_depolarizing())),
        ("Grover closed form", Duration::from_secs(10), Box::new(|_| c7_grover())),
        ("TSP 16-variable encoding", Duration::from_secs(60), Box::new(|_| c8_tsp_encoding())),
        ("Ising/QUBO isomorphism", Duration::from_secs(30), Box::new(|_| c9_ising_isomorphism())),
        ("annealer vs exhaustive", Duration::from_secs(120), Box::new(|_| c10_anneal())),
        ("QAOA sanity", Duration::from_secs(120), Box::new(|_| c11_qaoa())),
        ("RB self-consistency", Duration::from_secs(120), Box::new(|_| c12_rb())),
        ("20-qubit GHZ probe", Duration::from_secs(10), Box::new(|_| c13_ghz20())),
        ("CLI determinism", Duration::from_secs(120), Box::new(|_| c14_determinism())),
    ];
    let total = criteria.len();
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| check(&mut routed)))
            .unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed <= limit {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {:.2}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs()))
            }
        });
        match result {
            Ok(detail) => println!("PASS {:>2}. {name}: {detail} [{:.2}s]", i + 1, elapsed.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2}. {name}: {detail} [{:.2}s]", i + 1, elapsed.as_secs_f64());
            }
        }
    }
    println!("{}/{total} criteria passed", total - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
