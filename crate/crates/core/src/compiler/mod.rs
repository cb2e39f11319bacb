//! Maps a logical circuit onto a nearest-neighbour device.
//!
//! The pipeline is `decompose -> place_initial -> route -> schedule_asap`.
//! Routing inserts SWAPs so that every two-qubit gate acts on adjacent
//! positions; scheduling then packs gates into timed bundles.

mod topology;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::ir::{self, Bundle, Circuit, Gate, IrError, Opcode};
use crate::simulator::RunSummary;

pub use topology::{default_duration, Topology};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("circuit has {qubits} qubits but the topology only {positions} positions")]
    TooManyQubits { qubits: usize, positions: usize },
    #[error("{opcode} on positions {qubits:?} is not routed to adjacent positions")]
    NotRouted { opcode: Opcode, qubits: Vec<usize> },
    #[error("{0} acts on more than two qubits; decompose before routing")]
    NotDecomposed(Opcode),
    #[error("placement is not a bijection over {0} positions")]
    InvalidPlacement(usize),
    #[error("unknown placement strategy `{0}`")]
    UnknownStrategy(String),
    #[error(transparent)]
    Ir(#[from] IrError),
}

/// Expand a multi-controlled Z on `qubits` into CNOT and RZ gates.
///
/// One and two qubits map to `z` and `cz`. Larger gates use the parity
/// expansion `x_1...x_k = 2^{1-k} * sum_S (-1)^{|S|-1} XOR_{i in S} x_i`:
/// each subset phase is a CNOT ladder onto the subset's last qubit around an
/// RZ. The result equals the multi-controlled Z up to a global phase of
/// `exp(-i*pi/2^k)`.
pub fn decompose_mcz(qubits: &[usize]) -> Vec<Gate> {
    match qubits {
        [q] => return vec![Gate::single(Opcode::Z, *q)],
        [a, b] => return vec![Gate::two(Opcode::Cz, *a, *b)],
        _ => {}
    }
    let k = qubits.len();
    let unit = PI / (1u64 << (k - 1)) as f64;
    let mut gates = Vec::new();
    for subset in 1usize..(1 << k) {
        let members: Vec<usize> = (0..k).filter(|i| subset >> i & 1 == 1).map(|i| qubits[i]).collect();
        let (&target, controls) = members.split_last().expect("non-empty subset");
        let sign = if members.len() % 2 == 1 { 1.0 } else { -1.0 };
        for &c in controls {
            gates.push(Gate::cnot(c, target));
        }
        gates.push(Gate::rz(target, sign * unit));
        for &c in controls.iter().rev() {
            gates.push(Gate::cnot(c, target));
        }
    }
    gates
}

fn swap_as_cnots(a: usize, b: usize) -> [Gate; 3] {
    [Gate::cnot(a, b), Gate::cnot(b, a), Gate::cnot(a, b)]
}

/// Rewrite gates the target cannot run directly: `swap` becomes three
/// CNOTs when `native_swap` is false, and `mcz` on more than two qubits
/// always expands (see [`decompose_mcz`]). Bundles without such gates are
/// left untouched.
pub fn decompose(circuit: &Circuit, native_swap: bool) -> Circuit {
    let expand = |g: &Gate| -> Option<Vec<Gate>> {
        match g.opcode() {
            Opcode::Swap if !native_swap => Some(swap_as_cnots(g.qubits()[0], g.qubits()[1]).to_vec()),
            Opcode::Mcz => Some(decompose_mcz(g.qubits())),
            _ => None,
        }
    };
    let mut out = Circuit::with_version(circuit.version(), circuit.num_qubits()).expect("valid qubit count");
    for bundle in circuit.bundles() {
        let mut kept = Vec::new();
        let mut expanded = Vec::new();
        for g in bundle.gates() {
            match expand(g) {
                Some(gs) => expanded.extend(gs),
                None => kept.push(g.clone()),
            }
        }
        if !kept.is_empty() {
            out.push_bundle(Bundle::new(kept).expect("subset of a valid bundle"))
                .expect("same qubit range");
        }
        for g in expanded {
            out.push_gate(g).expect("same qubit range");
        }
    }
    out
}

/// Logical-to-physical assignment over all positions of a topology.
///
/// Logical indices at or above the circuit's qubit count are idle slots that
/// keep the map a permutation of the positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Placement {
    physical: Vec<usize>,
}

impl Placement {
    pub fn identity(num_positions: usize) -> Self {
        Placement {
            physical: (0..num_positions).collect(),
        }
    }

    /// `physical[l]` is the position of logical qubit `l`.
    pub fn from_vec(physical: Vec<usize>) -> Result<Self, CompileError> {
        let n = physical.len();
        let mut seen = vec![false; n];
        for &p in &physical {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(CompileError::InvalidPlacement(n));
            }
        }
        Ok(Placement { physical })
    }

    pub fn len(&self) -> usize {
        self.physical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.physical.is_empty()
    }

    pub fn physical(&self, logical: usize) -> usize {
        self.physical[logical]
    }

    pub fn logical_at(&self, position: usize) -> usize {
        self.physical
            .iter()
            .position(|&p| p == position)
            .expect("placement is a permutation")
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.physical
    }

    /// Exchange whatever logical qubits sit at positions `a` and `b`.
    pub fn swap_positions(&mut self, a: usize, b: usize) {
        for p in &mut self.physical {
            if *p == a {
                *p = b;
            } else if *p == b {
                *p = a;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlacementStrategy {
    #[default]
    Identity,
    /// Most-interacting pair on an edge, then remaining qubits by descending
    /// interaction count at the free position closest to their partners.
    InteractionDegree,
}

impl FromStr for PlacementStrategy {
    type Err = CompileError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "identity" => Ok(PlacementStrategy::Identity),
            "degree" | "interaction-degree" => Ok(PlacementStrategy::InteractionDegree),
            _ => Err(CompileError::UnknownStrategy(s.to_string())),
        }
    }
}

fn interaction_weights(circuit: &Circuit) -> Vec<Vec<u64>> {
    let n = circuit.num_qubits();
    let mut w = vec![vec![0u64; n]; n];
    for g in circuit.gates() {
        if let [a, b] = g.qubits() {
            w[*a][*b] += 1;
            w[*b][*a] += 1;
        }
    }
    w
}

pub fn place_initial(
    circuit: &Circuit,
    topo: &Topology,
    strategy: PlacementStrategy,
) -> Result<Placement, CompileError> {
    let n = circuit.num_qubits();
    let positions = topo.num_positions();
    if n > positions {
        return Err(CompileError::TooManyQubits { qubits: n, positions });
    }
    let weights = interaction_weights(circuit);
    let best_pair = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|&(a, b)| weights[a][b] > 0)
        .max_by(|&(a1, b1), &(a2, b2)| {
            weights[a1][b1]
                .cmp(&weights[a2][b2])
                .then((a2, b2).cmp(&(a1, b1)))
        });
    let (a, b) = match (strategy, best_pair) {
        (PlacementStrategy::InteractionDegree, Some(pair)) => pair,
        _ => return Ok(Placement::identity(positions)),
    };

    let mut slot: Vec<Option<usize>> = vec![None; n];
    let mut free = vec![true; positions];
    let anchor = (0..positions)
        .max_by(|&p, &q| topo.neighbours(p).len().cmp(&topo.neighbours(q).len()).then(q.cmp(&p)))
        .expect("at least one position");
    let partner = topo.neighbours(anchor)[0];
    slot[a] = Some(anchor);
    slot[b] = Some(partner);
    free[anchor] = false;
    free[partner] = false;

    let totals: Vec<u64> = weights.iter().map(|row| row.iter().sum()).collect();
    let mut order: Vec<usize> = (0..n).filter(|&q| q != a && q != b).collect();
    order.sort_by(|&p, &q| totals[q].cmp(&totals[p]).then(p.cmp(&q)));
    for q in order {
        let cost = |pos: usize| -> u64 {
            (0..n)
                .filter_map(|j| slot[j].map(|pj| weights[q][j] * topo.distance(pos, pj) as u64))
                .sum()
        };
        let pos = (0..positions)
            .filter(|&p| free[p])
            .min_by_key(|&p| (cost(p), p))
            .expect("enough free positions");
        slot[q] = Some(pos);
        free[pos] = false;
    }

    let mut physical: Vec<usize> = slot.into_iter().map(|s| s.expect("all placed")).collect();
    physical.extend((0..positions).filter(|&p| free[p]));
    Placement::from_vec(physical)
}

/// Insert SWAPs so every two-qubit gate lands on a topology edge.
///
/// For each non-adjacent pair the first qubit walks a shortest path towards
/// the second, preferring the lowest-numbered next position, until the two
/// are neighbours. The result is over `topo.num_positions()` qubits and
/// indexes physical positions.
pub fn route(
    circuit: &Circuit,
    topo: &Topology,
    initial: &Placement,
) -> Result<(Circuit, Placement), CompileError> {
    if circuit.num_qubits() > topo.num_positions() {
        return Err(CompileError::TooManyQubits {
            qubits: circuit.num_qubits(),
            positions: topo.num_positions(),
        });
    }
    if initial.len() != topo.num_positions() {
        return Err(CompileError::InvalidPlacement(topo.num_positions()));
    }
    let mut placement = initial.clone();
    let mut out = Circuit::with_version(circuit.version(), topo.num_positions()).expect("positive");

    for bundle in circuit.bundles() {
        let mut pending: Vec<Gate> = Vec::new();
        for gate in bundle.gates() {
            match gate.qubits() {
                [_] => {}
                [a, b] => {
                    let target = placement.physical(*b);
                    let mut here = placement.physical(*a);
                    if topo.distance(here, target) > 1 && !pending.is_empty() {
                        out.push_bundle(Bundle::new(std::mem::take(&mut pending))?)?;
                    }
                    while topo.distance(here, target) > 1 {
                        let d = topo.distance(here, target);
                        let next = *topo
                            .neighbours(here)
                            .iter()
                            .find(|&&n| topo.distance(n, target) == d - 1)
                            .expect("connected topology");
                        out.push_gate(Gate::swap(here, next))?;
                        placement.swap_positions(here, next);
                        here = next;
                    }
                }
                _ => return Err(CompileError::NotDecomposed(gate.opcode())),
            }
            pending.push(gate.remapped(|q| placement.physical(q))?);
        }
        if !pending.is_empty() {
            out.push_bundle(Bundle::new(pending)?)?;
        }
    }
    Ok((out, placement))
}

/// Routed circuit with per-bundle start cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledCircuit {
    pub circuit: Circuit,
    pub start_cycles: Vec<u64>,
    pub initial_placement: Placement,
    pub final_placement: Placement,
    pub swaps_inserted: usize,
    pub latency: u64,
}

impl AsRef<Circuit> for ScheduledCircuit {
    fn as_ref(&self) -> &Circuit {
        &self.circuit
    }
}

impl ScheduledCircuit {
    /// Assembly text with a `# cycle N` comment ahead of each bundle.
    pub fn to_qasm(&self) -> String {
        let mut out = format!(
            "version {}\nqubits {}\n",
            self.circuit.version(),
            self.circuit.num_qubits()
        );
        for (bundle, start) in self.circuit.bundles().iter().zip(&self.start_cycles) {
            out.push_str(&format!("# cycle {start}\n{}\n", ir::print_bundle(bundle)));
        }
        out
    }

    /// Placement report for `num_logical` logical qubits.
    pub fn report(&self, num_logical: usize) -> CompileReport {
        CompileReport {
            swaps: self.swaps_inserted,
            latency: self.latency,
            bundles: self.circuit.bundles().len(),
            gates: self.circuit.gate_count(),
            initial_placement: self.initial_placement.as_slice()[..num_logical].to_vec(),
            final_placement: self.final_placement.as_slice()[..num_logical].to_vec(),
        }
    }

    /// Re-key a histogram from measured positions to logical qubits, using
    /// the final placement. Assumes no SWAP follows a measurement.
    pub fn logical_summary(&self, summary: &RunSummary, num_logical: usize) -> RunSummary {
        let mut positions: Vec<usize> = self
            .circuit
            .gates()
            .filter(|g| g.opcode() == Opcode::MeasureZ)
            .map(|g| g.qubits()[0])
            .collect();
        positions.sort_unstable_by(|a, b| b.cmp(a));
        positions.dedup();
        let logical: Vec<usize> = positions.iter().map(|&p| self.final_placement.logical_at(p)).collect();
        let mut measured: Vec<usize> = logical.iter().copied().filter(|&l| l < num_logical).collect();
        measured.sort_unstable_by(|a, b| b.cmp(a));

        let mut histogram = BTreeMap::new();
        for (key, &count) in &summary.histogram {
            let mut bits = vec![b'0'; num_logical];
            for (ch, &l) in key.bytes().zip(&logical) {
                if l < num_logical {
                    bits[l] = ch;
                }
            }
            let out: String = measured.iter().map(|&l| bits[l] as char).collect();
            *histogram.entry(out).or_insert(0) += count;
        }
        RunSummary {
            shots: summary.shots,
            seed: summary.seed,
            histogram,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompileReport {
    pub swaps: usize,
    pub latency: u64,
    pub bundles: usize,
    pub gates: usize,
    /// Position of each logical qubit before execution.
    pub initial_placement: Vec<usize>,
    /// Position of each logical qubit after execution.
    pub final_placement: Vec<usize>,
}

/// ASAP list scheduling: every gate starts as soon as all of its qubits are
/// free, and gates sharing a start cycle form one bundle.
pub fn schedule_asap(circuit: &Circuit, topo: &Topology) -> Result<ScheduledCircuit, CompileError> {
    if circuit.num_qubits() > topo.num_positions() {
        return Err(CompileError::TooManyQubits {
            qubits: circuit.num_qubits(),
            positions: topo.num_positions(),
        });
    }
    let mut ready = vec![0u64; circuit.num_qubits()];
    let mut by_start: BTreeMap<u64, Vec<Gate>> = BTreeMap::new();
    let mut latency = 0;
    for gate in circuit.gates() {
        let qs = gate.qubits();
        match qs {
            [_] => {}
            [a, b] if topo.adjacent(*a, *b) => {}
            _ => {
                return Err(CompileError::NotRouted {
                    opcode: gate.opcode(),
                    qubits: qs.to_vec(),
                })
            }
        }
        let start = qs.iter().map(|&q| ready[q]).max().unwrap_or(0);
        let end = start + u64::from(topo.gate_duration(gate));
        for &q in qs {
            ready[q] = end;
        }
        latency = latency.max(end);
        by_start.entry(start).or_default().push(gate.clone());
    }
    let mut out = Circuit::with_version(circuit.version(), circuit.num_qubits()).expect("positive");
    let mut start_cycles = Vec::with_capacity(by_start.len());
    for (start, gates) in by_start {
        out.push_bundle(Bundle::new(gates)?)?;
        start_cycles.push(start);
    }
    let identity = Placement::identity(topo.num_positions());
    Ok(ScheduledCircuit {
        circuit: out,
        start_cycles,
        initial_placement: identity.clone(),
        final_placement: identity,
        swaps_inserted: 0,
        latency,
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CompileOptions {
    pub placement: PlacementStrategy,
}

/// Full pipeline. SWAPs inserted by routing are lowered to CNOTs as well
/// when the topology has no native SWAP.
pub fn compile(
    circuit: &Circuit,
    topo: &Topology,
    options: &CompileOptions,
) -> Result<ScheduledCircuit, CompileError> {
    let lowered = decompose(circuit, topo.native_swap());
    let initial = place_initial(&lowered, topo, options.placement)?;
    let (routed, final_placement) = route(&lowered, topo, &initial)?;
    let swaps_inserted = routed.gate_count() - lowered.gate_count();
    let routed = if topo.native_swap() {
        routed
    } else {
        decompose(&routed, false)
    };
    let mut scheduled = schedule_asap(&routed, topo)?;
    scheduled.initial_placement = initial;
    scheduled.final_placement = final_placement;
    scheduled.swaps_inserted = swaps_inserted;
    Ok(scheduled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse;
    use crate::simulator::{evolve, statevector, QuantumState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn circuit(n: usize, gates: Vec<Gate>) -> Circuit {
        Circuit::from_gates(n, gates).unwrap()
    }

    #[test]
    fn swap_lowering() {
        let c = circuit(2, vec![Gate::swap(0, 1)]);
        let d = decompose(&c, false);
        let gates: Vec<Gate> = d.gates().cloned().collect();
        assert_eq!(gates, vec![Gate::cnot(0, 1), Gate::cnot(1, 0), Gate::cnot(0, 1)]);
        assert_eq!(decompose(&c, true), c);
    }

    #[test]
    fn no_swap_is_fixed_point() {
        let c = parse("version 1.0\nqubits 3\n{ h q[0] | x q[1] }\ncnot q[0], q[2]\nmeasure q[1]\n").unwrap();
        assert_eq!(decompose(&c, false), c);
    }

    #[test]
    fn decompose_preserves_statevector() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let mut gates = Vec::new();
            for _ in 0..12 {
                let a = rng.gen_range(0..4);
                let b = (a + rng.gen_range(1..4)) % 4;
                gates.push(match rng.gen_range(0..4) {
                    0 => Gate::swap(a, b),
                    1 => Gate::h(a),
                    2 => Gate::cnot(a, b),
                    _ => Gate::rotation(Opcode::Ry, a, rng.gen_range(0.0..6.0)),
                });
            }
            let c = circuit(4, gates);
            let diff = statevector(&c).unwrap().max_abs_diff(&statevector(&decompose(&c, false)).unwrap());
            assert!(diff < 1e-10, "{diff}");
        }
    }

    #[test]
    fn mcz_expansion_matches_up_to_global_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for k in 1..=5usize {
            let qubits: Vec<usize> = (0..k).rev().collect();
            let native = circuit(k, vec![Gate::mcz(qubits.clone())]);
            let expanded = decompose(&native, true);
            assert!(expanded.gates().all(|g| g.qubits().len() <= 2));
            let phase = if k <= 2 {
                num_complex::Complex64::new(1.0, 0.0)
            } else {
                num_complex::Complex64::from_polar(1.0, -PI / (1u64 << k) as f64)
            };
            let start = QuantumState::random(k, &mut rng);
            let a = evolve(&native, start.clone()).unwrap();
            let b = evolve(&expanded, start).unwrap();
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                assert!((x * phase - y).norm() < 1e-10, "k={k}");
            }
        }
    }

    #[test]
    fn identity_and_degree_placement() {
        let topo = Topology::grid(2, 2).unwrap();
        let c = circuit(2, vec![Gate::h(0)]);
        assert_eq!(
            place_initial(&c, &topo, PlacementStrategy::InteractionDegree).unwrap(),
            Placement::identity(4)
        );
        let c = circuit(2, vec![Gate::cnot(0, 1), Gate::cnot(0, 1), Gate::h(1)]);
        let p = place_initial(&c, &topo, PlacementStrategy::InteractionDegree).unwrap();
        assert!(topo.adjacent(p.physical(0), p.physical(1)));

        // On a line, a star centred on qubit 3 pulls its partners next to it.
        let line = Topology::line(5).unwrap();
        let c = circuit(
            4,
            vec![Gate::cnot(3, 0), Gate::cnot(3, 0), Gate::cnot(3, 1), Gate::cnot(2, 3)],
        );
        let p = place_initial(&c, &line, PlacementStrategy::InteractionDegree).unwrap();
        assert!(line.adjacent(p.physical(3), p.physical(0)));
        assert_eq!(p.len(), 5);
        assert!(Placement::from_vec(p.as_slice().to_vec()).is_ok());

        let big = circuit(5, vec![]);
        assert!(matches!(
            place_initial(&big, &topo, PlacementStrategy::Identity),
            Err(CompileError::TooManyQubits { qubits: 5, positions: 4 })
        ));
    }

    #[test]
    fn placement_validation() {
        assert!(Placement::from_vec(vec![1, 0, 2]).is_ok());
        assert!(Placement::from_vec(vec![1, 1, 2]).is_err());
        assert!(Placement::from_vec(vec![0, 3, 1]).is_err());
        assert_eq!("degree".parse::<PlacementStrategy>().unwrap(), PlacementStrategy::InteractionDegree);
        assert!("random".parse::<PlacementStrategy>().is_err());
    }

    #[test]
    fn adjacent_gate_routes_unchanged() {
        let topo = Topology::line(2).unwrap();
        let c = circuit(2, vec![Gate::cnot(0, 1)]);
        let (routed, placement) = route(&c, &topo, &Placement::identity(2)).unwrap();
        assert_eq!(routed, c);
        assert_eq!(placement, Placement::identity(2));
    }

    #[test]
    fn line_routing_hand_trace() {
        let topo = Topology::line(3).unwrap();
        let c = circuit(3, vec![Gate::cnot(0, 2)]);
        let (routed, placement) = route(&c, &topo, &Placement::identity(3)).unwrap();
        let gates: Vec<Gate> = routed.gates().cloned().collect();
        assert_eq!(gates, vec![Gate::swap(0, 1), Gate::cnot(1, 2)]);
        assert_eq!(placement.as_slice(), &[1, 0, 2]);

        // Undo the permutation and compare with the unrouted statevector.
        let mut prep = vec![Gate::h(0), Gate::rotation(Opcode::Ry, 1, 0.4), Gate::h(2)];
        prep.push(Gate::cnot(0, 2));
        let c = circuit(3, prep);
        let (routed, placement) = route(&c, &topo, &Placement::identity(3)).unwrap();
        let logical = statevector(&routed).unwrap().restricted(placement.as_slice());
        assert!(logical.max_abs_diff(&statevector(&c).unwrap()) < 1e-12);
    }

    #[test]
    fn route_rejects_wide_gates() {
        let topo = Topology::line(3).unwrap();
        let c = circuit(3, vec![Gate::mcz(vec![0, 1, 2])]);
        assert!(matches!(
            route(&c, &topo, &Placement::identity(3)),
            Err(CompileError::NotDecomposed(Opcode::Mcz))
        ));
    }

    #[test]
    fn schedule_examples() {
        let topo = Topology::line(2).unwrap();
        let s = schedule_asap(&circuit(2, vec![Gate::h(0), Gate::x(1)]), &topo).unwrap();
        assert_eq!((s.circuit.bundles().len(), s.latency), (1, 1));
        assert_eq!(s.start_cycles, vec![0]);

        let s = schedule_asap(&circuit(2, vec![Gate::h(0), Gate::cnot(0, 1)]), &topo).unwrap();
        assert_eq!(s.start_cycles, vec![0, 1]);
        assert_eq!(s.latency, 3);

        let s = schedule_asap(&Circuit::new(2).unwrap(), &topo).unwrap();
        assert_eq!((s.circuit.bundles().len(), s.latency), (0, 0));

        let line = Topology::line(3).unwrap();
        assert!(matches!(
            schedule_asap(&circuit(3, vec![Gate::cnot(0, 2)]), &line),
            Err(CompileError::NotRouted { .. })
        ));
    }

    #[test]
    fn schedule_uses_topology_durations() {
        let topo = Topology::line(2).unwrap().with_duration(Opcode::H, 5).unwrap();
        let s = schedule_asap(&circuit(2, vec![Gate::h(0), Gate::x(1), Gate::cnot(0, 1), Gate::measure(1)]), &topo).unwrap();
        assert_eq!(s.start_cycles, vec![0, 5, 7]);
        assert_eq!(s.latency, 11);
    }

    #[test]
    fn compile_examples() {
        let bell = parse("version 1.0\nqubits 2\nh q[0]\ncnot q[0], q[1]\nmeasure q[0]\nmeasure q[1]\n").unwrap();
        let s = compile(&bell, &Topology::grid(2, 2).unwrap(), &CompileOptions::default()).unwrap();
        assert_eq!(s.swaps_inserted, 0);

        let line = Topology::line(4).unwrap();
        let ghz = circuit(4, vec![Gate::h(0), Gate::cnot(0, 1), Gate::cnot(1, 2), Gate::cnot(2, 3)]);
        assert_eq!(compile(&ghz, &line, &CompileOptions::default()).unwrap().swaps_inserted, 0);

        let reversed = circuit(4, vec![Gate::h(0), Gate::cnot(0, 3), Gate::cnot(0, 2), Gate::cnot(0, 1)]);
        let s = compile(&reversed, &line, &CompileOptions::default()).unwrap();
        assert!(s.swaps_inserted >= 1);
        for g in s.circuit.gates() {
            if let [a, b] = g.qubits() {
                assert!(line.adjacent(*a, *b));
            }
        }
    }

    #[test]
    fn compile_without_native_swap_leaves_no_swaps() {
        let line = Topology::line(4).unwrap().with_native_swap(false);
        let c = circuit(4, vec![Gate::h(0), Gate::cnot(0, 3), Gate::swap(1, 2)]);
        let s = compile(&c, &line, &CompileOptions::default()).unwrap();
        assert!(s.swaps_inserted >= 1);
        assert!(s.circuit.gates().all(|g| g.opcode() != Opcode::Swap));
        let logical = statevector(&s.circuit).unwrap().restricted(&s.final_placement.as_slice()[..4]);
        assert!(logical.max_abs_diff(&statevector(&c).unwrap()) < 1e-10);
    }

    #[test]
    fn scheduled_text_has_cycle_comments_and_reparses() {
        let c = circuit(2, vec![Gate::h(0), Gate::cnot(0, 1)]);
        let s = compile(&c, &Topology::line(2).unwrap(), &CompileOptions::default()).unwrap();
        let text = s.to_qasm();
        assert_eq!(text, "version 1.0\nqubits 2\n# cycle 0\nh q[0]\n# cycle 1\ncnot q[0], q[1]\n");
        assert_eq!(parse(&text).unwrap(), s.circuit);
    }
}
